#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <set>

#include "support.hpp"
#include "troplace/errors.hpp"
#include "troplace/graph.hpp"
#include "troplace/io.hpp"

using namespace troplace;
using troplace::testing::random_graph;
using troplace::testing::random_partition;
using troplace::testing::theta;

namespace {

OrderedPartition part(int ambient, std::vector<std::vector<int>> layers, std::vector<int> finite = {}) {
  OrderedPartition pi;
  pi.layers = std::move(layers);
  pi.finite = std::move(finite);
  pi.ambient = ambient;
  return pi;
}

// Rank of the block cycles restricted to the minor edges.
int block_rank(const CycleBasis& b, int block, const Minor& m) {
  const auto& idx = b.blocks[static_cast<size_t>(block)];
  if (idx.empty() || m.edges.empty()) return 0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(m.edges.size()));
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t k = 0; k < m.edges.size(); ++k)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          b.cycles[static_cast<size_t>(idx[i])][static_cast<size_t>(m.edges[k])];
  return static_cast<int>(a.fullPivLu().rank());
}

}  // namespace

TEST_CASE("theta minors for ({e1},{e2,e3})") {
  const Graph g = theta();
  const auto ms = graded_minors(g, part(3, {{0}, {1, 2}}));
  REQUIRE(ms.levels() == 3);
  const auto& m1 = ms.level(1);
  CHECK(m1.graph.n_vertices() == 1);
  CHECK(m1.graph.n_edges() == 1);
  CHECK(m1.graph.edges[0].is_loop());
  CHECK(m1.edges == std::vector<int>{0});
  const auto& m2 = ms.level(2);
  CHECK(m2.graph.n_vertices() == 2);
  CHECK(m2.graph.n_edges() == 2);
  CHECK(betti_number(m2.graph) == 1);
  CHECK(ms.level(3).graph.n_edges() == 0);
}

TEST_CASE("rank zero partition has G as its only minor") {
  const Graph g = theta();
  const auto ms = graded_minors(g, part(3, {}, {0, 1, 2}));
  REQUIRE(ms.levels() == 1);
  CHECK(ms.level(1).graph.n_edges() == 3);
  CHECK(ms.level(1).graph.n_vertices() == 2);
}

TEST_CASE("kite minors") {
  const auto spec = preset("kite");
  const auto ms = graded_minors(spec.graph, *spec.partition);
  REQUIRE(ms.levels() == 3);
  const auto& m1 = ms.level(1);
  CHECK(m1.graph.n_vertices() == 3);  // {u,w}, {v,x}, {y}
  CHECK(m1.graph.n_edges() == 5);
  CHECK(betti_number(m1.graph) == 3);
  CHECK(m1.kappa[0] == m1.kappa[2]);
  CHECK(m1.kappa[1] == m1.kappa[3]);
  const auto& m2 = ms.level(2);
  CHECK(m2.graph.n_vertices() == 5);
  CHECK(m2.graph.n_edges() == 2);
  CHECK(betti_number(m2.graph) == 0);
}

TEST_CASE("spanning trees of small graphs") {
  auto trees = spanning_trees(theta()).trees;
  std::sort(trees.begin(), trees.end());
  CHECK(trees == std::vector<std::vector<int>>{{0}, {1}, {2}});

  const auto loop = spanning_trees(testing::circle());
  REQUIRE(loop.trees.size() == 1);
  CHECK(loop.trees[0].empty());

  Graph tri;
  for (const char* v : {"a", "b", "c"}) tri.add_vertex(v);
  tri.add_edge("ab", 0, 1);
  tri.add_edge("bc", 1, 2);
  tri.add_edge("ca", 2, 0);
  const auto t3 = spanning_trees(tri);
  CHECK(t3.trees.size() == 3);
  for (const auto& t : t3.trees) CHECK(t.size() == 2);
}

TEST_CASE("spanning tree cap and disconnected flag") {
  Graph big;
  big.add_vertex("a");
  big.add_vertex("b");
  for (int i = 0; i < 21; ++i) big.add_edge("e" + std::to_string(i), 0, 1);
  CHECK_THROWS_AS(spanning_trees(big), EnumerationCapExceeded);
  CHECK(count_spanning_trees(big) == 21);

  Graph two;
  for (const char* v : {"a", "b", "c", "d"}) two.add_vertex(v);
  two.add_edge("ab", 0, 1);
  two.add_edge("cd", 2, 3);
  two.add_edge("cd2", 2, 3);
  const auto en = spanning_trees(two);
  CHECK(en.disconnected);
  CHECK(en.trees.size() == 2);
}

TEST_CASE("admissible basis on theta") {
  const Graph g = theta();
  const auto pi = part(3, {{0}, {1, 2}});
  const auto b = admissible_basis(g, pi);
  REQUIRE(b.size() == 2);
  REQUIRE(b.blocks[0].size() == 1);
  REQUIRE(b.blocks[1].size() == 1);
  const auto& g1 = b.cycles[static_cast<size_t>(b.blocks[0][0])];
  const auto& g2 = b.cycles[static_cast<size_t>(b.blocks[1][0])];
  CHECK(g1[0] != 0);
  CHECK((g1[1] != 0) != (g1[2] != 0));
  CHECK(g2[0] == 0);
  CHECK(g2[1] != 0);
  CHECK(g2[2] != 0);
  const auto ms = graded_minors(g, pi);
  CHECK(block_rank(b, 0, ms.level(1)) == 1);
  CHECK(block_rank(b, 1, ms.level(2)) == 1);
}

TEST_CASE("tree graph has an empty basis") {
  Graph t;
  for (const char* v : {"a", "b", "c"}) t.add_vertex(v);
  t.add_edge("ab", 0, 1);
  t.add_edge("bc", 1, 2);
  CHECK(cycle_basis(t).size() == 0);
  CHECK(admissible_basis(t, OrderedPartition::trivial(2)).size() == 0);
}

TEST_CASE("refinement order examples") {
  const auto ef = part(2, {{0, 1}});
  const auto e_f = part(2, {{0}, {1}});
  const auto f_e = part(2, {{1}, {0}});
  CHECK(refines(ef, e_f));
  CHECK_FALSE(refines(e_f, f_e));
  CHECK(refines(e_f, e_f));
  CHECK(tame_refines(ef, ef));
}

TEST_CASE("malformed partitions are rejected") {
  const Graph g = theta();
  CHECK_THROWS_AS(parse_partition(g, "e1|e1"), MalformedPartition);
  CHECK_THROWS_AS(parse_partition(g, "e9"), MalformedPartition);
  CHECK_THROWS_AS(part(3, {{0}, {}}).validate(), MalformedPartition);
}

TEST_CASE("property: genus additivity, admissibility, contraction, matrix-tree") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Graph g = random_graph(rng);
    const int levels = 1 + static_cast<int>(rng() % 4);
    const auto pi = random_partition(rng, g.n_edges(), levels, rng() % 2 == 0);
    const auto ms = graded_minors(g, pi);
    int sum = 0;
    for (const auto& m : ms.minors) sum += betti_number(m.graph);
    CHECK(sum == betti_number(g));

    const auto b = admissible_basis(g, pi);
    CHECK(b.size() == betti_number(g));
    for (size_t j = 0; j < ms.minors.size(); ++j) {
      CHECK(static_cast<int>(b.blocks[j].size()) == betti_number(ms.minors[j].graph));
      CHECK(block_rank(b, static_cast<int>(j), ms.minors[j]) == static_cast<int>(b.blocks[j].size()));
    }
    for (const auto& c : b.cycles)
      for (int v : chain_boundary(g, c)) CHECK(v == 0);

    for (int e = 0; e < g.n_edges(); ++e)
      if (!g.edges[static_cast<size_t>(e)].is_loop()) {
        CHECK(augmented_genus(contract_edge(g, e)) == augmented_genus(g));
        break;
      }
    CHECK(spanning_trees(g).trees.size() == count_spanning_trees(g));
  }
}

TEST_CASE("property: refinement is a partial order") {
  std::mt19937_64 rng(11);
  const int n = 4;
  std::vector<OrderedPartition> ps;
  for (int i = 0; i < 40; ++i) ps.push_back(random_partition(rng, n, 1 + static_cast<int>(rng() % 4), rng() % 2 == 0));
  auto same = [](const OrderedPartition& a, const OrderedPartition& b) {
    auto norm = [](OrderedPartition p) {
      for (auto& l : p.layers) std::sort(l.begin(), l.end());
      std::sort(p.finite.begin(), p.finite.end());
      return std::make_pair(p.layers, p.finite);
    };
    return norm(a) == norm(b);
  };
  for (const auto& a : ps) {
    CHECK(refines(a, a));
    for (const auto& b : ps) {
      if (refines(a, b) && refines(b, a)) CHECK(same(a, b));
      for (const auto& c : ps)
        if (refines(a, b) && refines(b, c)) CHECK(refines(a, c));
    }
  }
}

TEST_CASE("doubles read as their shortest decimal") {
  using troplace::decimal_rational;
  CHECK(decimal_rational(0.1) == troplace::Rational(1, 10));
  CHECK(decimal_rational(-2.5) == troplace::Rational(-5, 2));
  CHECK(decimal_rational(3) == 3);
  CHECK(decimal_rational(1e-7) == troplace::Rational(1, 10000000));
  CHECK(decimal_rational(1.25e22) == troplace::Rational(mpz_class("12500000000000000000000")));
  CHECK(decimal_rational(0) == 0);
  CHECK(troplace::scalar_cast<double>(0.1) == 0.1);
  for (double x : {0.1, 1.0 / 3, 12345.6789, 6.02e23, 5e-324, -0.7}) CHECK(troplace::to_double(decimal_rational(x)) == x);
  CHECK(troplace::to_double(troplace::Rational(1, 10)) == 0.1);
  CHECK_THROWS(decimal_rational(INFINITY));
}
