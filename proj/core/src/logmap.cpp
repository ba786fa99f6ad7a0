#include "troplace/logmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "troplace/errors.hpp"
#include "troplace/rational.hpp"

namespace troplace {

void AuxiliaryFamily::validate() const {
  if (!(base > 2) || !std::isfinite(base)) throw SchemaError("phi base must be a finite number > 2");
}

double AuxiliaryFamily::exponent(int j) const { return std::pow(base, j - 1); }

double AuxiliaryFamily::phi(int j, double t) const { return std::pow(t, exponent(j)); }

double AuxiliaryFamily::log_sum(int lo, int hi, double u) const {
  if (hi <= lo) return -std::numeric_limits<double>::infinity();
  // the top term dominates since u >= 0
  const double top = exponent(hi) * u;
  double acc = 0;
  for (int i = lo + 1; i <= hi; ++i) acc += std::exp(exponent(i) * u - top);
  return top + std::log(acc);
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;

struct Sorted {
  std::vector<int> order;       // descending by value, ties by index
  std::vector<double> log_sum;  // ln of the k largest, k = 1..n
  int positive = 0;
};

Sorted sort_desc(const std::vector<double>& x) {
  Sorted s;
  s.order.resize(x.size());
  std::iota(s.order.begin(), s.order.end(), 0);
  std::stable_sort(s.order.begin(), s.order.end(), [&](int a, int b) { return x[a] > x[b]; });
  double acc = 0;
  for (int i : s.order) {
    acc += x[i];
    s.log_sum.push_back(std::log(acc));
    if (x[i] > 0) ++s.positive;
  }
  return s;
}

void check_coordinates(const std::vector<double>& x) {
  if (x.empty()) throw SchemaError("empty coordinate vector");
  for (double v : x)
    if (!std::isfinite(v) || v < 0) throw DomainError("coordinates must be finite and nonnegative");
}

int resolve_dim(const std::vector<double>& x, int M) {
  const int n = static_cast<int>(x.size());
  if (M < 0) return n;
  if (M < n) throw SchemaError("ambient dimension smaller than the number of coordinates");
  return M;
}

// Smallest u = ln t >= 0 with ln S_k <= g(k, u) for k = 1..kmax. The bracket
// grows by doubling t, then bisects in ln t.
template <class G>
double solve_parameter(const Sorted& s, int kmax, G g, const LogMapConfig& cfg) {
  auto feasible = [&](double u) {
    for (int k = 1; k <= kmax; ++k)
      if (s.log_sum[k - 1] > g(k, u)) return false;
    return true;
  };
  if (feasible(0)) return 0;
  double lo = 0, hi = kLn2;
  for (int n = 0; !feasible(hi); ++n) {
    if (n > 8192) throw NumericalError("exhaustion bracket did not close");
    lo = hi;
    hi += kLn2;
  }
  int it = 0;
  for (; it < cfg.max_iterations && hi - lo > cfg.bisection_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  if (hi - lo > cfg.bisection_tol) throw NumericalError("bisection did not converge");
  return hi;
}

struct Face {
  std::vector<std::vector<int>> layers;  // original coordinate indices
  std::vector<int> finite;
  bool ambiguous = false;
};

// Cuts at the tight k; a cut between near-equal coordinates is dropped. The
// slack allowed on constraint k includes its spread across the final bisection
// bracket, which grows like 3^(M-1) for the top auxiliary function.
template <class G>
Face read_face(const std::vector<double>& x, const Sorted& s, int kmax, bool closed, double u, G g,
               const LogMapConfig& cfg) {
  std::vector<int> cuts;
  Face face;
  for (int k = 1; k <= kmax; ++k) {
    const double gk = g(k, u);
    const double spread = gk - g(k, u - cfg.bisection_tol);
    if (std::abs(s.log_sum[k - 1] - gk) > cfg.tight_tol + std::abs(spread)) continue;
    if (k < s.positive) {
      const double a = x[s.order[k - 1]], b = x[s.order[k]];
      if (a - b <= cfg.tight_tol * a) {
        face.ambiguous = true;
        continue;
      }
    }
    cuts.push_back(k);
  }
  if (closed && (cuts.empty() || cuts.back() != s.positive)) cuts.push_back(s.positive);
  int start = 0;
  for (int k : cuts) {
    face.layers.emplace_back(s.order.begin() + start, s.order.begin() + k);
    start = k;
  }
  face.finite.assign(s.order.begin() + start, s.order.begin() + s.positive);
  for (auto& l : face.layers) std::sort(l.begin(), l.end());
  std::sort(face.finite.begin(), face.finite.end());
  return face;
}

std::vector<double> gather(const std::vector<double>& x, const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(x[i]);
  return out;
}

std::vector<double> normalized(std::vector<double> v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& c : v) c /= sum;
  return v;
}

// ln ι_t(s) from u = ln s, v = ln t.
double log_iota(double v, double u) {
  if (std::isinf(v)) return u;
  return u + std::log1p(-std::exp(-v)) - std::log1p(-std::exp(u - v));
}

// Keep a sub-parameter strictly below the outer one.
double below(double u, double v) { return std::min(u, v - 1e-15 * std::max(1.0, v)); }

double max_coord(const std::vector<double>& x) { return *std::max_element(x.begin(), x.end()); }

struct ConeFace {
  double u = 0;
  Face face;
};

ConeFace cone_face(const std::vector<double>& x, int M, const LogMapConfig& cfg) {
  const auto s = sort_desc(x);
  const auto& fam = cfg.family;
  auto g = [&](int k, double u) { return fam.log_sum(M - k, M, u); };
  ConeFace cf;
  cf.u = solve_parameter(s, s.positive, g, cfg);
  cf.face = read_face(x, s, s.positive, false, cf.u, g, cfg);
  if (cf.u > 0 && cf.face.layers.empty()) throw NumericalError("no tight constraint at the exhaustion parameter");
  return cf;
}

}  // namespace

std::vector<double> vertex_curve(const std::vector<int>& order, const AuxiliaryFamily& fam, double t) {
  const int m = static_cast<int>(order.size());
  std::vector<double> x(order.size(), 0.0);
  for (int l = 0; l < m; ++l) x.at(order[l]) = fam.phi(m - l, t);
  return x;
}

bool in_exhaustion(const std::vector<double>& x, const AuxiliaryFamily& fam, double t, int M) {
  check_coordinates(x);
  M = resolve_dim(x, M);
  if (t < 1) return false;
  const auto s = sort_desc(x);
  const double u = std::log(t);
  for (int k = 1; k <= s.positive; ++k)
    if (s.log_sum[k - 1] > fam.log_sum(M - k, M, u)) return false;
  return true;
}

double exhaustion_parameter(const std::vector<double>& x, const LogMapConfig& cfg, int M) {
  check_coordinates(x);
  cfg.family.validate();
  M = resolve_dim(x, M);
  if (max_coord(x) <= 1) throw DomainError("domain is the compactified cone minus the unit cube");
  return std::exp(cone_face(x, M, cfg).u);
}

OrderedPartition boundary_partition(const std::vector<double>& x, const LogMapConfig& cfg, int M,
                                    bool* ambiguous) {
  check_coordinates(x);
  cfg.family.validate();
  M = resolve_dim(x, M);
  if (max_coord(x) <= 1) throw DomainError("domain is the compactified cone minus the unit cube");
  const auto cf = cone_face(x, M, cfg);
  if (ambiguous) *ambiguous = cf.face.ambiguous;
  OrderedPartition pi;
  pi.layers = cf.face.layers;
  pi.finite = cf.face.finite;
  pi.ambient = static_cast<int>(x.size());
  return pi;
}

double iota(double t, double s) {
  if (!(s >= 1) || !(t > 1) || s > t) throw DomainError("iota needs 1 <= s <= t, t > 1");
  if (std::isinf(t)) return s;
  if (s == t) return std::numeric_limits<double>::infinity();
  return (1 + (s - 1) / (t - s)) * s;
}

std::vector<double> simplex_unfold(const std::vector<double>& y, int lo, double t, const LogMapConfig& cfg) {
  check_coordinates(y);
  const int n = static_cast<int>(y.size());
  if (n == 1) return {1.0};
  for (double c : y)
    if (c <= 0) throw DomainError("simplex point must be interior");
  const auto& fam = cfg.family;
  const int hi = lo + n;
  const auto s = sort_desc(y);
  auto g = [&](int k, double u) { return fam.log_sum(hi - k, hi, u) - fam.log_sum(lo, hi, u); };
  const double v = std::log(t);
  double u = solve_parameter(s, n - 1, g, cfg);
  if (u == 0) return std::vector<double>(y.size(), 1.0 / n);
  const auto face = read_face(y, s, n - 1, true, u, g, cfg);
  u = below(u, v);
  const double ut = log_iota(v, u);
  std::vector<double> out(y.size(), 0.0);
  int top = hi;
  const double total = fam.log_sum(lo, hi, ut);
  for (const auto& layer : face.layers) {
    const int sz = static_cast<int>(layer.size());
    const double w = std::exp(fam.log_sum(top - sz, top, ut) - total);
    const auto q = simplex_unfold(normalized(gather(y, layer)), top - sz, t, cfg);
    for (int i = 0; i < sz; ++i) out[layer[i]] = w * q[i];
    top -= sz;
  }
  return out;
}

std::vector<double> cone_unfold(const std::vector<double>& x, int M, double t, const LogMapConfig& cfg) {
  if (x.empty()) return x;
  check_coordinates(x);
  M = resolve_dim(x, M);
  if (max_coord(x) <= 1) return x;
  const auto& fam = cfg.family;
  const double v = std::log(t);
  const auto cf = cone_face(x, M, cfg);
  const double ut = log_iota(v, below(cf.u, v));
  std::vector<double> out(x.size(), 0.0);
  int top = M;
  for (const auto& layer : cf.face.layers) {
    const int sz = static_cast<int>(layer.size());
    const double w = std::exp(fam.log_sum(top - sz, top, ut));
    const auto q = simplex_unfold(normalized(gather(x, layer)), top - sz, t, cfg);
    for (int i = 0; i < sz; ++i) out[layer[i]] = w * q[i];
    top -= sz;
  }
  const auto f = cone_unfold(gather(x, cf.face.finite), top, t, cfg);
  for (size_t i = 0; i < f.size(); ++i) out[cf.face.finite[i]] = f[i];
  return out;
}

StratumPoint log_trop(const std::vector<double>& x, const LogMapConfig& cfg, int M) {
  check_coordinates(x);
  cfg.family.validate();
  M = resolve_dim(x, M);
  if (max_coord(x) <= 1) throw DomainError("domain is the compactified cone minus the unit cube");
  const auto cf = cone_face(x, M, cfg);
  const double t = std::exp(cf.u);
  StratumPoint p;
  p.partition.layers = cf.face.layers;
  p.partition.finite = cf.face.finite;
  p.partition.ambient = static_cast<int>(x.size());
  p.ambiguous = cf.face.ambiguous;
  int top = M;
  for (const auto& layer : cf.face.layers) {
    const int sz = static_cast<int>(layer.size());
    p.layers.push_back(simplex_unfold(normalized(gather(x, layer)), top - sz, t, cfg));
    top -= sz;
  }
  p.finite = cone_unfold(gather(x, cf.face.finite), top, t, cfg);
  for (double c : p.finite)
    if (!std::isfinite(c)) throw NumericalError("finitary coordinate overflow near a stratum boundary");
  return p;
}

StratumPoint log_trop(const StratumPoint& p, const LogMapConfig& cfg) {
  if (p.layers.size() != p.partition.layers.size() || p.finite.size() != p.partition.finite.size())
    throw SchemaError("stratum point does not match its partition");
  if (p.at_infinity()) {
    for (size_t j = 0; j < p.layers.size(); ++j) {
      if (p.layers[j].size() != p.partition.layers[j].size()) throw SchemaError("layer size mismatch");
      const double sum = std::accumulate(p.layers[j].begin(), p.layers[j].end(), 0.0);
      if (std::abs(sum - 1) > 1e-9) throw SchemaError("layer coordinates must sum to 1");
    }
    return p;
  }
  std::vector<double> x(static_cast<size_t>(p.partition.ambient), 0.0);
  for (size_t i = 0; i < p.finite.size(); ++i) x.at(p.partition.finite[i]) = p.finite[i];
  return log_trop(x, cfg);
}

template <class T>
StratumPointT<T> pr_pi(const std::vector<T>& x, const OrderedPartition& pi) {
  if (static_cast<int>(x.size()) != pi.ambient) throw SchemaError("coordinate count does not match partition");
  StratumPointT<T> p;
  p.partition = pi;
  for (const auto& layer : pi.layers) {
    T sum = 0;
    for (int i : layer) sum += x.at(i);
    if (sum == 0) throw DomainError("zero layer sum in stratumwise projection");
    std::vector<T> c;
    for (int i : layer) c.push_back(T(x[i] / sum));
    p.layers.push_back(std::move(c));
  }
  for (int i : pi.finite) p.finite.push_back(x.at(i));
  return p;
}

template StratumPointT<double> pr_pi(const std::vector<double>&, const OrderedPartition&);
template StratumPointT<Rational> pr_pi(const std::vector<Rational>&, const OrderedPartition&);

}  // namespace troplace
