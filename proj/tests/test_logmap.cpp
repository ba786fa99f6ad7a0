#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "troplace/errors.hpp"
#include "troplace/logmap.hpp"

using namespace troplace;
using namespace troplace::testing;

namespace {

// Points outside the unit cube on several scales, some coordinates zero.
std::vector<double> random_outside(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> logu(-3, 12), u(0, 1);
  for (;;) {
    std::vector<double> x(static_cast<size_t>(dim(rng)));
    for (auto& c : x) c = u(rng) < 0.15 ? 0.0 : std::exp(logu(rng));
    if (*std::max_element(x.begin(), x.end()) > 1.01) return x;
  }
}

}  // namespace

TEST_CASE("auxiliary family") {
  AuxiliaryFamily fam;
  CHECK_NOTHROW(fam.validate());
  CHECK_THROWS_AS(AuxiliaryFamily{2}.validate(), SchemaError);
  CHECK_THROWS_AS(AuxiliaryFamily{1.5}.validate(), SchemaError);
  CHECK(fam.phi(1, 5) == doctest::Approx(5));
  CHECK(fam.phi(2, 5) == doctest::Approx(125));
  CHECK(fam.phi(3, 2) == doctest::Approx(512));
  for (double t : {1.5, 2.0, 7.0})
    for (int lo = 0; lo < 3; ++lo)
      for (int hi = lo + 1; hi <= 4; ++hi) {
        double direct = 0;
        for (int j = lo + 1; j <= hi; ++j) direct += fam.phi(j, t);
        CHECK(fam.log_sum(lo, hi, std::log(t)) == doctest::Approx(std::log(direct)).epsilon(1e-13));
      }
  // no overflow far out
  CHECK(std::isfinite(fam.log_sum(0, 5, 100.0)));
}

TEST_CASE("vertex curves sit on the boundary of their own exhaustion") {
  AuxiliaryFamily fam;
  const std::vector<int> order{2, 0, 1};
  for (double t : {1.2, 2.0, 10.0, 1e3}) {
    const auto x = vertex_curve(order, fam, t);
    CHECK(x[2] == doctest::Approx(fam.phi(3, t)));
    CHECK(x[1] == doctest::Approx(fam.phi(1, t)));
    CHECK(exhaustion_parameter(x) == doctest::Approx(t).epsilon(1e-10));
  }
}

TEST_CASE("exhaustion parameter is undefined inside the unit cube") {
  CHECK_THROWS_AS(exhaustion_parameter({0.5, 0.2}), DomainError);
  CHECK_THROWS_AS(exhaustion_parameter({1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(exhaustion_parameter({}), SchemaError);
  CHECK_THROWS_AS(exhaustion_parameter({2.0, -1.0}), DomainError);
}

TEST_CASE("boundary partitions of simple points") {
  // equal coordinates tie in a single layer
  auto p = boundary_partition({5, 5});
  REQUIRE(p.layers.size() == 1);
  CHECK(p.layers[0] == std::vector<int>{0, 1});
  CHECK(p.finite.empty());

  // the vertex (Φ₂, Φ₁) splits into singletons, largest first
  AuxiliaryFamily fam;
  p = boundary_partition({fam.phi(2, 3), fam.phi(1, 3)});
  REQUIRE(p.layers.size() == 2);
  CHECK(p.layers[0] == std::vector<int>{0});
  CHECK(p.layers[1] == std::vector<int>{1});

  // a small coordinate stays finitary
  p = boundary_partition({100, 0.5});
  REQUIRE(p.layers.size() == 1);
  CHECK(p.layers[0] == std::vector<int>{0});
  CHECK(p.finite == std::vector<int>{1});

  // zeros are deleted
  p = boundary_partition({0, 7, 0});
  REQUIRE(p.layers.size() == 1);
  CHECK(p.layers[0] == std::vector<int>{1});
  CHECK(p.finite.empty());
}

TEST_CASE("property: foliation, one exhaustion parameter per point") {
  std::mt19937_64 rng(79);
  const LogMapConfig cfg;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_outside(rng);
    const double t = exhaustion_parameter(x, cfg);
    CHECK(t > 1);
    CHECK(in_exhaustion(x, cfg.family, t * (1 + 1e-9)));
    CHECK_FALSE(in_exhaustion(x, cfg.family, t * (1 - 1e-9)));
  }
}

TEST_CASE("property: log map lands on a boundary stratum") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = random_outside(rng);
    const auto sp = log_trop(x);
    CHECK(sp.at_infinity());
    REQUIRE(sp.layers.size() == sp.partition.layers.size());
    REQUIRE(sp.finite.size() == sp.partition.finite.size());
    std::vector<int> seen;
    for (size_t j = 0; j < sp.layers.size(); ++j) {
      REQUIRE(sp.layers[j].size() == sp.partition.layers[j].size());
      double sum = 0;
      for (double c : sp.layers[j]) {
        // strictly positive in exact arithmetic; extreme spreads underflow to 0
        CHECK(c >= 0);
        sum += c;
      }
      CHECK(sum == doctest::Approx(1).epsilon(1e-12));
      seen.insert(seen.end(), sp.partition.layers[j].begin(), sp.partition.layers[j].end());
    }
    for (double c : sp.finite) CHECK(c > 0);
    seen.insert(seen.end(), sp.partition.finite.begin(), sp.partition.finite.end());
    // every nonzero coordinate appears once
    std::sort(seen.begin(), seen.end());
    std::vector<int> nz;
    for (size_t i = 0; i < x.size(); ++i)
      if (x[i] != 0) nz.push_back(static_cast<int>(i));
    CHECK(seen == nz);

    // the log map is the identity on the stratum it lands on
    const auto again = log_trop(sp);
    CHECK(again.partition.layers == sp.partition.layers);
    CHECK(again.layers == sp.layers);
    CHECK(again.finite == sp.finite);
  }
}

TEST_CASE("property: log map commutes with coordinate permutations") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_outside(rng);
    std::vector<int> perm(x.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[static_cast<size_t>(perm[i])] = x[i];
    const auto a = log_trop(x), b = log_trop(y);
    REQUIRE(a.partition.layers.size() == b.partition.layers.size());
    auto value_of = [](const StratumPoint& s, int coord) {
      for (size_t j = 0; j < s.layers.size(); ++j)
        for (size_t i = 0; i < s.layers[j].size(); ++i)
          if (s.partition.layers[j][i] == coord) return std::make_pair(static_cast<int>(j), s.layers[j][i]);
      for (size_t i = 0; i < s.finite.size(); ++i)
        if (s.partition.finite[i] == coord) return std::make_pair(-1, s.finite[i]);
      return std::make_pair(-2, 0.0);
    };
    for (size_t i = 0; i < x.size(); ++i) {
      const auto va = value_of(a, static_cast<int>(i)), vb = value_of(b, perm[i]);
      CHECK(va.first == vb.first);
      CHECK(va.second == doctest::Approx(vb.second).epsilon(1e-9));
    }
  }
}

TEST_CASE("vertex curves map to compactification vertices") {
  AuxiliaryFamily fam;
  const std::vector<int> order{1, 3, 0, 2};
  for (double t : {1.5, 4.0, 50.0}) {
    const auto sp = log_trop(vertex_curve(order, fam, t));
    REQUIRE(sp.partition.layers.size() == 4);
    for (size_t j = 0; j < 4; ++j) {
      CHECK(sp.partition.layers[j] == std::vector<int>{order[j]});
      CHECK(sp.layers[j] == std::vector<double>{1.0});
    }
    CHECK(sp.finite.empty());
  }
}

TEST_CASE("simplex unfolding on small inputs") {
  // (s, s³) with base 3 sits on the vertex-curve edge through (Φ₁, Φ₂).
  const double s = 1.7;
  const auto q = simplex_unfold({s / (s + s * s * s), s * s * s / (s + s * s * s)}, 0, 50);
  CHECK(q[0] + q[1] == doctest::Approx(1));
  CHECK(q[0] < q[1]);
  const auto one = simplex_unfold({1.0}, 2, 10);
  CHECK(one == std::vector<double>{1.0});
}

TEST_CASE("iota and unfolding maps") {
  CHECK(iota(10, 1) == doctest::Approx(1));
  CHECK(iota(1e12, 3) == doctest::Approx(3).epsilon(1e-9));
  double prev = 1;
  for (double s : {1.5, 2.0, 4.0, 8.0}) {
    const double v = iota(10, s);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(cone_unfold({0.5, 1.0}, 2, 7) == std::vector<double>{0.5, 1.0});
  CHECK(cone_unfold({}, 2, 7).empty());
}

TEST_CASE("face compatibility through the ambient dimension") {
  // A point of a coordinate face reads the same faces whether seen in its own
  // dimension or in the larger cone with the same ambient M.
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_outside(rng);
    const int M = static_cast<int>(x.size()) + 2;
    auto padded = x;
    padded.push_back(0);
    padded.push_back(0);
    const auto a = boundary_partition(x, {}, M), b = boundary_partition(padded, {}, M);
    CHECK(a.layers == b.layers);
    CHECK(a.finite == b.finite);
    CHECK(exhaustion_parameter(x, {}, M) == doctest::Approx(exhaustion_parameter(padded, {}, M)).epsilon(1e-12));
  }
}

TEST_CASE("stratumwise projection") {
  OrderedPartition pi;
  pi.ambient = 3;
  pi.layers = {{0}, {1, 2}};
  const auto p = pr_pi<double>({1000, 7, 3}, pi);
  CHECK(p.layers[0] == std::vector<double>{1.0});
  CHECK(p.layers[1][0] == doctest::Approx(0.7));
  CHECK(p.layers[1][1] == doctest::Approx(0.3));

  const auto q = pr_pi<Rational>({Rational(1000), Rational(7), Rational(3)}, pi);
  CHECK(q.layers[1][0] == Rational(7, 10));
  CHECK(q.layers[1][1] == Rational(3, 10));

  OrderedPartition f;
  f.ambient = 3;
  f.layers = {{0}};
  f.finite = {1, 2};
  const auto r = pr_pi<double>({4, 0.25, 2}, f);
  CHECK(r.finite == std::vector<double>{0.25, 2});
  CHECK_THROWS_AS(pr_pi<double>({0, 1, 1}, f), DomainError);
}

TEST_CASE("high dimension: tight constraint survives the bisection spread") {
  // Used to read an empty face and recurse without end.
  const std::vector<double> x{1e6, 13.838068702464934, 1.7256713649563344, 0.17090491002131969,
                              12.281498294809587, 12.04238252599651, 1.8698781238292232, 1.8363383784805529};
  const auto pi = boundary_partition(x);
  REQUIRE(pi.layers.size() == 1);
  CHECK(pi.layers[0] == std::vector<int>{0});
  CHECK(pi.finite.size() == 7);
  // the unfolded finitary part is near 4.5^729, past double range
  CHECK_THROWS_AS(log_trop(x), NumericalError);

  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> logu(-2, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> y(10);
    for (auto& c : y) c = std::exp(logu(rng));
    y[trial % 10] = 1e7;
    CHECK_FALSE(boundary_partition(y).layers.empty());
  }
}
