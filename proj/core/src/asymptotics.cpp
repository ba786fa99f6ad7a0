#include "troplace/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>

#include "troplace/errors.hpp"
#include "troplace/linalg.hpp"
#include "troplace/potential.hpp"

namespace troplace {

DegenerationSchedule DegenerationSchedule::standard(int rank) {
  DegenerationSchedule s;
  for (int j = 1; j <= rank; ++j) s.beta.push_back(std::pow(3.0, rank - j));
  return s;
}

void DegenerationSchedule::validate() const {
  for (size_t j = 0; j < beta.size(); ++j) {
    if (!(beta[j] > 0) || !std::isfinite(beta[j])) throw SchemaError("schedule exponents must be positive");
    if (j + 1 < beta.size() && !(beta[j] > 2 * beta[j + 1]))
      throw SchemaError("schedule must satisfy beta_j > 2 beta_{j+1}");
  }
}

bool DegenerationSchedule::integral() const {
  return std::all_of(beta.begin(), beta.end(), [](double b) { return b == std::floor(b); });
}

template <>
std::vector<double> DegenerationSchedule::scales<double>(const double& s) const {
  std::vector<double> out;
  for (double b : beta) out.push_back(std::pow(s, b));
  return out;
}

template <>
std::vector<Rational> DegenerationSchedule::scales<Rational>(const Rational& s) const {
  if (!integral()) throw SchemaError("rational mode needs integer schedule exponents");
  std::vector<Rational> out;
  for (double b : beta) {
    Rational p(1);
    for (long i = 0; i < static_cast<long>(b); ++i) p *= s;
    out.push_back(p);
  }
  return out;
}

double DegenerationSchedule::poisson_exponent(bool has_finite) const {
  double best = -std::numeric_limits<double>::infinity();
  const int r = rank();
  for (int j = 0; j + 1 < r; ++j) best = std::max(best, 2 * beta[j + 1] - beta[j]);
  if (has_finite && r > 0) best = std::max(best, -beta[r - 1]);
  return std::isfinite(best) ? best : std::numeric_limits<double>::quiet_NaN();
}

double DegenerationSchedule::block_exponent(int n, bool has_finite) const {
  double best = -std::numeric_limits<double>::infinity();
  const int r = rank();
  for (int k = 1; k <= std::min(n, r); ++k) {
    if (k < r)
      best = std::max(best, beta[k] - beta[k - 1]);
    else if (has_finite)
      best = std::max(best, -beta[k - 1]);
  }
  return std::isfinite(best) ? best : std::numeric_limits<double>::quiet_NaN();
}

namespace {

template <class T>
void check_same_type(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg) {
  const Graph& a = tc.graph;
  const Graph& b = mg.graph;
  if (a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() || mg.length.size() != tc.length.size())
    throw SchemaError("metric graph and tropical curve have different combinatorial types");
  for (int e = 0; e < a.n_edges(); ++e)
    if (a.edges[e].tail != b.edges[e].tail || a.edges[e].head != b.edges[e].head)
      throw SchemaError("metric graph and tropical curve have different combinatorial types");
}

template <class T>
T max_abs(const Mat<T>& m) {
  T best(0);
  for (const auto& row : m)
    for (const auto& v : row) best = std::max(best, T(v < T(0) ? T(-v) : v));
  return best;
}

// Σ_e ℓ(e) γ_a(e) γ_b(e) over every edge.
template <class T>
Mat<T> full_block(const CycleBasis& basis, const std::vector<T>& ell, int i, int k) {
  const auto& Ji = basis.blocks.at(i - 1);
  const auto& Jk = basis.blocks.at(k - 1);
  Mat<T> out = zeros<T>(static_cast<int>(Ji.size()), static_cast<int>(Jk.size()));
  for (size_t e = 0; e < ell.size(); ++e)
    for (size_t a = 0; a < Ji.size(); ++a) {
      const int ga = basis.cycles[Ji[a]][e];
      if (!ga) continue;
      for (size_t b = 0; b < Jk.size(); ++b)
        if (const int gb = basis.cycles[Jk[b]][e]) out[a][b] += ell[e] * T(ga * gb);
    }
  return out;
}

template <class T>
Mat<T> sub_block(const Mat<T>& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat<T> out = zeros<T>(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b) out[a][b] = m[rows[a]][cols[b]];
  return out;
}

template <class T>
Mat<T> add(Mat<T> a, const Mat<T>& b, const T& sb = T(1)) {
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) a[i][j] += sb * b[i][j];
  return a;
}

template <class T>
double relative_gap(const Mat<T>& got, const Mat<T>& want) {
  const T d = max_abs(add(got, want, T(-1)));
  const T w = max_abs(want);
  return to_double(d) / (w > T(0) ? to_double(w) : 1.0);
}

// ∫_{from}^{to} of a piecewise quadratic along one edge.
template <class T>
T integrate_range(const std::vector<Piece<T>>& ps, const T& from, const T& to) {
  T acc(0);
  for (const auto& pc : ps) {
    const T lo = std::max(from, pc.s0), hi = std::min(to, pc.s1);
    if (hi > lo) acc += integrate_piece(pc, T(lo - pc.s0), T(hi - pc.s0));
  }
  return acc;
}

// ∫ h dΔf restricted to one edge of length len: bulk -f'' h, kinks, and the
// outgoing slopes at both ends.
template <class T>
T edge_laplacian_pairing(const std::vector<Piece<T>>& ps, const std::function<T(const T&)>& h,
                         const std::function<T(const T&, const T&)>& h_int, const T& len) {
  T acc(0);
  for (size_t i = 0; i < ps.size(); ++i) {
    const auto& pc = ps[i];
    if (pc.a != T(0)) acc += T(-2) * pc.a * h_int(pc.s0, pc.s1);
    if (i + 1 < ps.size()) acc += (pc.slope(pc.length()) - ps[i + 1].slope(T(0))) * h(pc.s1);
  }
  acc -= ps.front().slope(T(0)) * h(T(0));
  acc += ps.back().slope(ps.back().length()) * h(len);
  return acc;
}

// Rank-one tree classes: weight ω_𝒞(T) with class 0 (layered), 1 (𝒯_1) or -1.
template <class T>
struct TreeClasses {
  std::vector<std::vector<int>> trees;
  std::vector<T> weight;
  std::vector<int> cls;
};

template <class T>
TreeClasses<T> tree_classes(const TropicalCurveT<T>& tc) {
  if (tc.rank() != 1) throw DomainError("tree-class expansion needs a rank-one curve");
  const auto en = spanning_trees(tc.graph);
  const int p1 = static_cast<int>(tc.partition.edges_at(1).size());
  const int h1 = betti_number(tc.minor(1).graph);
  TreeClasses<T> out;
  for (const auto& tr : en.trees) {
    std::vector<char> in(tc.graph.n_edges(), 0);
    for (int e : tr) in[e] = 1;
    int x1 = 0;
    T w(1);
    for (int e = 0; e < tc.graph.n_edges(); ++e) {
      if (in[e] && tc.level[e] == 1) ++x1;
      if (!in[e]) w *= tc.length[e];
    }
    out.trees.push_back(tr);
    out.weight.push_back(w);
    out.cls.push_back(x1 == p1 - h1 ? 0 : x1 == p1 - h1 + 1 ? 1 : -1);
  }
  return out;
}

template <class T>
std::vector<PointT<T>> poles(const Graph& g, const std::vector<T>& len) {
  return sample_points(g, len, 1);
}

template <class T>
PWQT<T> solve_first_minor(const TropicalCurveT<T>& tc, const MeasureT<T>& omega, const MeasureT<T>& nu) {
  return solve_poisson(tc.minor_metric(1), omega, NormalizationT<T>::integral(nu));
}

template <class T>
CorrectionResidual correction_residual(const TropicalCurveT<T>& tcs, const LayeredMeasureT<T>& mu_l,
                                       const LayeredMeasureT<T>& mu_c, const std::vector<T>& eps,
                                       const std::vector<MeasureT<T>>& omegas, int per_edge) {
  const auto m1 = tcs.minor_metric(1);
  std::vector<PWQT<T>> psi;
  for (const auto& w : omegas) psi.push_back(solve_first_minor(tcs, w, mu_c.parts[0]));
  const auto ys = sample_points(m1.graph, m1.length, per_edge);
  CorrectionResidual out;
  for (const auto& x : poles(tcs.graph, tcs.length)) {
    const auto gl = tropical_green(tcs, mu_l, x).parts[0];
    const auto gc = tropical_green(tcs, mu_c, x).parts[0];
    std::vector<T> at_x;
    for (const auto& w : omegas) at_x.push_back(integrate(m1.graph, gc, w));
    for (const auto& y : ys) {
      const T d = evaluate(m1.graph, gl, y) - evaluate(m1.graph, gc, y);
      T corr(0);
      for (size_t n = 0; n < omegas.size(); ++n) corr -= eps[n] * (evaluate(m1.graph, psi[n], y) + at_x[n]);
      out.plain = std::max(out.plain, abs_d(d));
      out.corrected = std::max(out.corrected, abs_d(T(d - corr)));
    }
  }
  return out;
}

}  // namespace

template <class T>
MetricGraphT<T> degenerate(const TropicalCurveT<T>& tc, const DegenerationSchedule& sched, const T& s) {
  if (sched.rank() != tc.rank()) throw SchemaError("schedule length must equal the rank");
  sched.validate();
  if (!(s >= T(1))) throw DomainError("scale parameter must be at least 1");
  const auto L = sched.template scales<T>(s);
  MetricGraphT<T> mg{tc.graph, tc.length};
  for (int e = 0; e < tc.graph.n_edges(); ++e) {
    const int lv = tc.level[e];
    if (lv >= 1 && lv <= tc.rank()) mg.length[e] = L[lv - 1] * tc.length[e];
  }
  return mg;
}

template <class T>
std::vector<T> layer_scales(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg) {
  std::vector<T> L;
  for (int k = 1; k <= tc.rank(); ++k) L.push_back(mg.layer_length(tc.partition, k));
  L.push_back(T(1));
  return L;
}

template <class T>
TropicalCurveT<T> project_to_stratum(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg) {
  check_same_type(tc, mg);
  return TropicalCurveT<T>::make(mg.graph, tc.partition, mg.length, true);
}

template <class T>
PointT<T> to_metric_point(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const PointT<T>& x) {
  const auto p = canonical_point(tc.graph, tc.length, x);
  if (p.is_vertex()) return p;
  return PointT<T>::on_edge(p.edge, p.offset * mg.length[p.edge] / tc.length[p.edge]);
}

template <class T>
PointT<T> to_curve_point(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const PointT<T>& y) {
  const auto p = canonical_point(mg.graph, mg.length, y);
  if (p.is_vertex()) return p;
  return PointT<T>::on_edge(p.edge, p.offset * tc.length[p.edge] / mg.length[p.edge]);
}

template <class T>
MeasureT<T> transport_measure(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const MeasureT<T>& mu) {
  check_same_type(tc, mg);
  MeasureT<T> out(tc.graph.n_edges());
  for (const auto& [p, m] : mu.atoms) out.add_atom(to_curve_point(tc, mg, p), m);
  for (size_t e = 0; e < mu.density.size(); ++e) out.density[e] = mu.density[e] * mg.length[e] / tc.length[e];
  return out;
}

template <class T>
PWQT<T> pullback(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, const MetricGraphT<T>& mg) {
  check_same_type(tc, mg);
  if (static_cast<int>(F.parts.size()) != tc.levels()) throw SchemaError("tropical function has the wrong number of parts");
  const auto L = layer_scales(tc, mg);
  std::vector<PWQT<T>> ext;
  for (int k = 1; k <= tc.levels(); ++k) ext.push_back(extend(tc, k, F.parts[k - 1]));
  const Graph& g = tc.graph;
  PWQT<T> out;
  out.vertex_value.assign(g.n_vertices(), T(0));
  for (size_t k = 0; k < ext.size(); ++k)
    for (int v = 0; v < g.n_vertices(); ++v) out.vertex_value[v] += L[k] * ext[k].vertex_value[v];
  out.pieces.resize(g.n_edges());
  for (int e = 0; e < g.n_edges(); ++e) {
    const T& l = tc.length[e];
    const T& ell = mg.length[e];
    const T sigma = l / ell;
    std::vector<T> cuts{T(0), l};
    for (const auto& f : ext)
      for (const auto& pc : f.pieces[e]) cuts.push_back(pc.s1);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    while (!cuts.empty() && cuts.back() > l) cuts.pop_back();
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const T& t0 = cuts[i];
      Piece<T> np{t0 / sigma, i + 2 == cuts.size() ? ell : T(cuts[i + 1] / sigma), T(0), T(0), T(0)};
      for (size_t k = 0; k < ext.size(); ++k) {
        const auto& ps = ext[k].pieces[e];
        const Piece<T>* pc = &ps.back();
        for (const auto& q : ps)
          if (q.s1 > t0) {
            pc = &q;
            break;
          }
        // local Γ coordinate d + σ u for the mg offset u from the piece start
        const T d = t0 - pc->s0;
        np.a += L[k] * pc->a * sigma * sigma;
        np.b += L[k] * (T(2) * pc->a * d + pc->b) * sigma;
        np.c += L[k] * pc->at(d);
      }
      out.pieces[e].push_back(np);
    }
  }
  return out;
}

template <class T>
std::vector<PointT<T>> sample_points(const Graph& g, const std::vector<T>& len, int per_edge) {
  std::vector<PointT<T>> out;
  for (int v = 0; v < g.n_vertices(); ++v) out.push_back(PointT<T>::at_vertex(v));
  for (int e = 0; e < g.n_edges(); ++e)
    for (int i = 1; i <= per_edge; ++i) out.push_back(PointT<T>::on_edge(e, len[e] * T(i) / T(per_edge + 1)));
  return out;
}

template <class T>
double expansion_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const DivisorT<T>& d, int pin,
                       int per_edge) {
  const auto tcs = project_to_stratum(tc, mg);
  const int E = tc.graph.n_edges();
  DivisorT<T> dm;
  for (const auto& [p, c] : d) dm.emplace_back(to_metric_point(tcs, mg, p), c);
  const auto x0 = PointT<T>::at_vertex(pin);
  const auto f = solve_poisson(mg, divisor_measure(E, dm), NormalizationT<T>::pinned(x0));
  const auto F = solve_tropical_poisson(tcs, pushout(tcs, divisor_measure(E, d)), dirac(E, x0));
  const auto P = pullback(tcs, F, mg);
  double err = 0;
  for (const auto& y : sample_points(mg.graph, mg.length, per_edge))
    err = std::max(err, abs_d(T(evaluate(mg.graph, f, y) - evaluate(mg.graph, P, y))));
  return err;
}

template <class T>
double expansion_error_j_route(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const DivisorT<T>& d, int pin,
                               int per_edge) {
  const auto tcs = project_to_stratum(tc, mg);
  const int E = tc.graph.n_edges();
  const auto x0 = PointT<T>::at_vertex(pin);
  const auto ys = sample_points(mg.graph, mg.length, per_edge);
  std::vector<T> acc(ys.size(), T(0));
  for (const auto& [p, c] : d) {
    const auto pm = to_metric_point(tcs, mg, p);
    const auto j = solve_poisson(mg, dirac(E, pm) - dirac(E, x0), NormalizationT<T>::pinned(x0));
    const auto J = pullback(tcs, tropical_j(tcs, p, x0, x0), mg);
    for (size_t i = 0; i < ys.size(); ++i)
      acc[i] += c * (evaluate(mg.graph, j, ys[i]) - evaluate(mg.graph, J, ys[i]));
  }
  double err = 0;
  for (const auto& a : acc) err = std::max(err, abs_d(a));
  return err;
}

template <class T>
GreenExpansion green_expansion_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, int per_edge) {
  const auto tcs = project_to_stratum(tc, mg);
  const auto mu = canonical_measure(mg);
  const auto layered = pushout(tcs, transport_measure(tcs, mg, mu));
  const auto ys = sample_points(mg.graph, mg.length, per_edge);
  GreenExpansion out;
  double scale = 0;
  for (const auto& x : poles(tcs.graph, tcs.length)) {
    const auto g = green_function(mg, mu, to_metric_point(tcs, mg, x));
    const auto P = pullback(tcs, tropical_green(tcs, layered, x), mg);
    for (const auto& y : ys) {
      const T gv = evaluate(mg.graph, g, y);
      scale = std::max(scale, abs_d(gv));
      out.absolute = std::max(out.absolute, abs_d(T(gv - evaluate(mg.graph, P, y))));
    }
  }
  out.relative = scale > 0 ? out.absolute / scale : out.absolute;
  return out;
}

template <class T>
double height_expansion_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const DivisorT<T>& d1,
                              const DivisorT<T>& d2) {
  const auto tcs = project_to_stratum(tc, mg);
  DivisorT<T> m1, m2;
  for (const auto& [p, c] : d1) m1.emplace_back(to_metric_point(tcs, mg, p), c);
  for (const auto& [p, c] : d2) m2.emplace_back(to_metric_point(tcs, mg, p), c);
  const T h = height_pairing(mg, m1, m2);
  const auto parts = tropical_height(tcs, d1, d2);
  const auto L = layer_scales(tcs, mg);
  T approx(0);
  for (size_t k = 0; k < parts.size(); ++k) approx += L[k] * parts[k];
  const double den = abs_d(h);
  return abs_d(T(h - approx)) / (den > 0 ? den : 1.0);
}

template <class T>
Mat<T> ap_matrix_metric(const CycleBasis& basis, const std::vector<int>& level, const std::vector<T>& ell,
                        const std::vector<int>& path) {
  if (path.empty()) throw SchemaError("empty increasing sequence");
  Mat<T> acc = inverse(period_block(basis, level, ell, path[0], path[0]));
  for (size_t s = 1; s < path.size(); ++s) {
    if (path[s] <= path[s - 1]) throw SchemaError("sequence must be strictly increasing");
    acc = matmul(matmul(acc, full_block(basis, ell, path[s - 1], path[s])),
                 inverse(period_block(basis, level, ell, path[s], path[s])));
  }
  if ((path.size() - 1) % 2 == 1)
    for (auto& row : acc)
      for (auto& v : row) v = -v;
  return acc;
}

template <class T>
std::vector<BlockError> inverse_period_blocks(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg) {
  const auto tcs = project_to_stratum(tc, mg);
  const CycleBasis& B = tcs.basis;
  std::vector<BlockError> out;
  if (B.size() == 0) return out;
  const Mat<T> inv = inverse(period_matrix_t(mg.graph, mg.length, B));
  const auto L = layer_scales(tcs, mg);
  const int nb = static_cast<int>(B.blocks.size());
  for (int m = 1; m <= nb; ++m)
    for (int n = m; n <= nb; ++n) {
      if (B.blocks[m - 1].empty() || B.blocks[n - 1].empty()) continue;
      const Mat<T> blk = sub_block(inv, B.blocks[m - 1], B.blocks[n - 1]);
      Mat<T> sum_mg = zeros<T>(static_cast<int>(blk.size()), static_cast<int>(blk[0].size()));
      Mat<T> sum_tc = sum_mg;
      for (const auto& p : increasing_paths(B, m, n)) {
        sum_mg = add(sum_mg, ap_matrix_metric(B, tcs.level, mg.length, p));
        sum_tc = add(sum_tc, ap_matrix(B, tcs.level, tcs.length, p));
      }
      Mat<T> scaled = blk;
      for (auto& row : scaled)
        for (auto& v : row) v *= L[m - 1];
      out.push_back(BlockError{m, n, relative_gap(blk, sum_mg), relative_gap(scaled, sum_tc)});
    }
  return out;
}

template <class T>
T tropical_laplacian_pairing(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, const PWQT<T>& h) {
  const Graph& g = tc.graph;
  T acc(0);
  for (int k = 1; k <= tc.levels(); ++k) {
    const Minor& m = tc.minor(k);
    for (int e : tc.partition.edges_at(k)) {
      const auto& ps = F.parts.at(k - 1).pieces.at(m.edge_pos[e]);
      auto hv = [&](const T& t) -> T { return evaluate(g, h, canonical_point(g, tc.length, PointT<T>::on_edge(e, t))); };
      auto hi = [&](const T& a, const T& b) -> T { return integrate_range(h.pieces[e], a, b); };
      acc += edge_laplacian_pairing<T>(ps, hv, hi, tc.length[e]);
    }
  }
  return acc;
}

template <class T>
double weak_laplacian_gap(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, const PWQT<T>& h,
                          const MetricGraphT<T>& mg) {
  const auto P = pullback(tc, F, mg);
  const Graph& g = tc.graph;
  T lhs(0);
  for (int e = 0; e < g.n_edges(); ++e) {
    const T r = tc.length[e] / mg.length[e];
    auto hv = [&](const T& u) -> T { return evaluate(g, h, canonical_point(g, tc.length, PointT<T>::on_edge(e, T(u * r)))); };
    auto hi = [&](const T& a, const T& b) -> T { return integrate_range(h.pieces[e], T(a * r), T(b * r)) / r; };
    lhs += edge_laplacian_pairing<T>(P.pieces[e], hv, hi, mg.length[e]);
  }
  return abs_d(T(lhs - tropical_laplacian_pairing(tc, F, h)));
}

template <class T>
std::vector<T> tropical_foster(const TropicalCurveT<T>& tc) {
  std::vector<T> out(tc.graph.n_edges(), T(0));
  for (int k = 1; k <= tc.levels(); ++k) {
    const auto mu = foster(tc.minor_metric(k));
    const auto& edges = tc.minor(k).edges;
    for (size_t me = 0; me < edges.size(); ++me) out[edges[me]] = mu[me];
  }
  return out;
}

template <class T>
std::vector<T> foster_first_order(const TropicalCurveT<T>& tc) {
  const auto tcl = tree_classes(tc);
  const auto mu = tropical_foster(tc);
  const int E = tc.graph.n_edges();
  T layered(0), first(0);
  std::vector<T> missing(E, T(0));
  for (size_t i = 0; i < tcl.trees.size(); ++i) {
    if (tcl.cls[i] == 0) layered += tcl.weight[i];
    if (tcl.cls[i] != 1) continue;
    first += tcl.weight[i];
    std::vector<char> in(E, 0);
    for (int e : tcl.trees[i]) in[e] = 1;
    for (int e = 0; e < E; ++e)
      if (!in[e]) missing[e] += tcl.weight[i];
  }
  if (layered == T(0)) throw NumericalError("no layered spanning trees");
  std::vector<T> q(E);
  for (int e = 0; e < E; ++e) q[e] = (missing[e] - mu[e] * first) / layered;
  return q;
}

template <class T>
double foster_law_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg) {
  const auto tcs = project_to_stratum(tc, mg);
  const auto q = foster_first_order(tcs);
  const auto mu_c = tropical_foster(tcs);
  const auto mu = foster(mg);
  const T L1 = layer_scales(tcs, mg)[0];
  double num = 0, den = 0;
  for (size_t e = 0; e < q.size(); ++e) {
    num = std::max(num, abs_d(T(L1 * (mu[e] - mu_c[e]) - q[e])));
    den = std::max(den, abs_d(q[e]));
  }
  return den > 0 ? num / den : num;
}

template <class T>
MeasureT<T> canonical_defect_measure(const TropicalCurveT<T>& tc) {
  const auto tcl = tree_classes(tc);
  const auto mu = tropical_foster(tc);
  const int E = tc.graph.n_edges();
  T layered(0);
  for (size_t i = 0; i < tcl.trees.size(); ++i)
    if (tcl.cls[i] == 0) layered += tcl.weight[i];
  if (layered == T(0)) throw NumericalError("no layered spanning trees");
  MeasureT<T> out(E);
  for (size_t i = 0; i < tcl.trees.size(); ++i) {
    if (tcl.cls[i] != 1) continue;
    const T w = tcl.weight[i] / layered;
    std::vector<char> in(E, 0);
    for (int e : tcl.trees[i]) in[e] = 1;
    for (int e = 0; e < E; ++e) out.density[e] += w * (T(in[e] ? 0 : 1) - mu[e]) / tc.length[e];
  }
  return out;
}

template <class T>
CorrectionResidual lebesgue_correction(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, int per_edge) {
  const auto tcs = project_to_stratum(tc, mg);
  if (tcs.rank() < 1) throw DomainError("Lebesgue correction needs rank at least one");
  const int E = tc.graph.n_edges();
  MeasureT<T> lam(E);
  const T total = mg.total_length();
  for (int e = 0; e < E; ++e) lam.density[e] = T(1) / total;
  const auto mu_l = pushout(tcs, transport_measure(tcs, mg, lam));
  LayeredMeasureT<T> mu_c;
  for (int k = 1; k <= tcs.levels(); ++k) {
    MeasureT<T> part(tcs.minor(k).graph.n_edges());
    if (k == 1)
      for (auto& d : part.density) d = T(1);
    mu_c.parts.push_back(part);
  }
  const auto L = layer_scales(tcs, mg);
  std::vector<T> eps;
  std::vector<MeasureT<T>> omegas;
  for (int n = 2; n <= tcs.levels(); ++n) {
    const auto& en = tcs.partition.edges_at(n);
    if (en.empty()) continue;
    T mass(0);
    for (int e : en) mass += tcs.length[e];
    MeasureT<T> nu(E);
    for (int e : en) nu.density[e] = T(1);
    for (int e : tcs.partition.edges_at(1)) nu.density[e] = -mass;
    omegas.push_back(pushout(tcs, nu).parts[0]);
    eps.push_back(L[n - 1] / L[0]);
  }
  return correction_residual(tcs, mu_l, mu_c, eps, omegas, per_edge);
}

template <class T>
CorrectionResidual canonical_correction(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, int per_edge) {
  const auto tcs = project_to_stratum(tc, mg);
  const auto mu_l = pushout(tcs, transport_measure(tcs, mg, canonical_measure(mg)));
  const auto mu_c = canonical_measure_tropical(tcs);
  const auto nu = pushout(tcs, canonical_defect_measure(tcs)).parts[0];
  const T L1 = layer_scales(tcs, mg)[0];
  const T eps = T(1) / (T(augmented_genus(tcs.graph)) * L1);
  return correction_residual(tcs, mu_l, mu_c, std::vector<T>{eps}, std::vector<MeasureT<T>>{nu}, per_edge);
}

RateFit fit_rate(const std::vector<double>& s, const std::vector<double>& err, int last) {
  std::vector<double> x, y;
  for (size_t i = 0; i < s.size() && i < err.size(); ++i)
    if (err[i] > 0 && std::isfinite(err[i]) && s[i] > 0) {
      x.push_back(std::log(s[i]));
      y.push_back(std::log(err[i]));
    }
  RateFit fit;
  if (static_cast<int>(x.size()) > last) {
    x.erase(x.begin(), x.end() - last);
    y.erase(y.begin(), y.end() - last);
  }
  fit.points = static_cast<int>(x.size());
  if (fit.points < 2) return fit;
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

Experiment parse_experiment(const std::string& name) {
  static const std::pair<const char*, Experiment> table[] = {
      {"poisson", Experiment::Poisson}, {"green", Experiment::Green},   {"period", Experiment::Period},
      {"height", Experiment::Height},   {"foster", Experiment::Foster}, {"lebesgue", Experiment::Lebesgue},
      {"canonical", Experiment::Canonical}};
  for (const auto& [n, e] : table)
    if (name == n) return e;
  throw SchemaError("unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Poisson: return "poisson";
    case Experiment::Green: return "green";
    case Experiment::Period: return "period";
    case Experiment::Height: return "height";
    case Experiment::Foster: return "foster";
    case Experiment::Lebesgue: return "lebesgue";
    case Experiment::Canonical: return "canonical";
  }
  return "?";
}

namespace {

template <class T>
DivisorT<T> convert_divisor(const Divisor& d) {
  DivisorT<T> out;
  for (const auto& [p, c] : d) out.emplace_back(convert_point<T>(p), scalar_cast<T>(c));
  return out;
}

template <class T>
std::vector<double> sweep_point(const Graph& g, const OrderedPartition& pi, const std::vector<double>& length,
                                const SweepConfig& cfg, double s_value, std::vector<double>* scales) {
  std::vector<T> len;
  for (double l : length) len.push_back(scalar_cast<T>(l));
  const auto tc = TropicalCurveT<T>::make(g, pi, len, true);
  const auto mg = degenerate(tc, cfg.schedule, scalar_cast<T>(s_value));
  const auto L = layer_scales(tc, mg);
  for (int k = 0; k < tc.rank(); ++k) scales->push_back(to_double(L[k]));
  const auto d1 = convert_divisor<T>(cfg.d1), d2 = convert_divisor<T>(cfg.d2);
  switch (cfg.experiment) {
    case Experiment::Poisson: return {expansion_error(tc, mg, d1, cfg.pin, cfg.per_edge)};
    case Experiment::Green: return {green_expansion_error(tc, mg, std::max(1, cfg.per_edge / 4)).relative};
    case Experiment::Height: return {height_expansion_error(tc, mg, d1, d2)};
    case Experiment::Foster: return {foster_law_error(tc, mg)};
    case Experiment::Lebesgue: {
      const auto r = lebesgue_correction(tc, mg, std::max(1, cfg.per_edge / 4));
      return {r.plain, r.corrected};
    }
    case Experiment::Canonical: {
      const auto r = canonical_correction(tc, mg, std::max(1, cfg.per_edge / 4));
      return {r.plain, r.corrected};
    }
    case Experiment::Period: {
      std::vector<double> out;
      for (const auto& b : inverse_period_blocks(tc, mg)) out.push_back(b.m == b.n ? b.vs_limit : b.vs_sum_ap);
      return out;
    }
  }
  return {};
}

}  // namespace

SweepResult run_sweep(const Graph& g, const OrderedPartition& pi, const std::vector<double>& length,
                      const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  if (cfg.schedule.beta.empty()) cfg.schedule = DegenerationSchedule::standard(pi.rank());
  if (cfg.schedule.rank() != pi.rank()) throw SchemaError("schedule length must equal the partition rank");
  cfg.schedule.validate();
  if (cfg.s_grid.empty()) throw SchemaError("empty s grid");
  for (double s : cfg.s_grid)
    if (!(s >= 1) || !std::isfinite(s)) throw SchemaError("s grid values must be finite and at least 1");
  if (cfg.exact && !cfg.schedule.integral()) throw SchemaError("rational mode needs integer schedule exponents");
  if (cfg.d1.empty()) {
    if (g.n_vertices() < 2) throw SchemaError("default divisor needs two vertices");
    cfg.d1 = {{Point::at_vertex(0), 1.0}, {Point::at_vertex(g.n_vertices() - 1), -1.0}};
  }
  if (cfg.d2.empty()) cfg.d2 = cfg.d1;

  const auto tc = TropicalCurve::make(g, pi, length, true);
  const bool has_finite = !pi.finite.empty();
  const auto& sched = cfg.schedule;
  SweepResult res;
  switch (cfg.experiment) {
    case Experiment::Poisson:
      res.metrics = {"error"};
      res.predicted = {sched.poisson_exponent(has_finite)};
      break;
    case Experiment::Green:
    case Experiment::Height:
      res.metrics = {"error"};
      res.predicted = {std::numeric_limits<double>::quiet_NaN()};
      break;
    case Experiment::Foster:
      if (pi.rank() != 1) throw DomainError("the Foster law needs a rank-one partition");
      res.metrics = {"error"};
      res.predicted = {-sched.beta[0]};
      break;
    case Experiment::Lebesgue:
    case Experiment::Canonical:
      if (cfg.experiment == Experiment::Canonical && pi.rank() != 1)
        throw DomainError("the canonical correction needs a rank-one partition");
      res.metrics = {"error", "error_corrected"};
      res.predicted = {-sched.beta[0], -2 * sched.beta[0]};
      break;
    case Experiment::Period: {
      const auto& B = tc.basis;
      const int nb = static_cast<int>(B.blocks.size());
      for (int m = 1; m <= nb; ++m)
        for (int n = m; n <= nb; ++n) {
          if (B.blocks[m - 1].empty() || B.blocks[n - 1].empty()) continue;
          if (m == n) {
            res.metrics.push_back("error_diag_" + std::to_string(m));
            res.predicted.push_back(std::numeric_limits<double>::quiet_NaN());
          } else {
            res.metrics.push_back("error_block_" + std::to_string(m) + "_" + std::to_string(n));
            res.predicted.push_back(sched.block_exponent(n, has_finite));
          }
        }
      break;
    }
  }

  const size_t N = cfg.s_grid.size();
  res.s = cfg.s_grid;
  res.L.assign(N, {});
  res.values.assign(N, {});
  auto job = [&](size_t i) {
    std::vector<double> L;
    auto v = cfg.exact ? sweep_point<Rational>(g, pi, length, cfg, cfg.s_grid[i], &L)
                       : sweep_point<double>(g, pi, length, cfg, cfg.s_grid[i], &L);
    return std::make_pair(L, v);
  };
  if (cfg.parallel && N > 1) {
    std::vector<std::future<std::pair<std::vector<double>, std::vector<double>>>> fut;
    for (size_t i = 0; i < N; ++i) fut.push_back(std::async(std::launch::async, job, i));
    for (size_t i = 0; i < N; ++i) std::tie(res.L[i], res.values[i]) = fut[i].get();
  } else {
    for (size_t i = 0; i < N; ++i) std::tie(res.L[i], res.values[i]) = job(i);
  }
  for (size_t m = 0; m < res.metrics.size(); ++m) {
    std::vector<double> col;
    for (const auto& row : res.values) col.push_back(m < row.size() ? row[m] : std::numeric_limits<double>::quiet_NaN());
    res.fits.push_back(fit_rate(res.s, col));
  }
  return res;
}

#define TROPLACE_INSTANTIATE(T)                                                                                     \
  template MetricGraphT<T> degenerate<T>(const TropicalCurveT<T>&, const DegenerationSchedule&, const T&);          \
  template std::vector<T> layer_scales<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&);                        \
  template TropicalCurveT<T> project_to_stratum<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&);               \
  template PointT<T> to_metric_point<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, const PointT<T>&);        \
  template PointT<T> to_curve_point<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, const PointT<T>&);         \
  template MeasureT<T> transport_measure<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, const MeasureT<T>&);  \
  template PWQT<T> pullback<T>(const TropicalCurveT<T>&, const TropicalFunctionT<T>&, const MetricGraphT<T>&);      \
  template std::vector<PointT<T>> sample_points<T>(const Graph&, const std::vector<T>&, int);                       \
  template double expansion_error<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, const DivisorT<T>&, int,    \
                                     int);                                                                          \
  template double expansion_error_j_route<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, const DivisorT<T>&, \
                                             int, int);                                                             \
  template GreenExpansion green_expansion_error<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, int);          \
  template double height_expansion_error<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, const DivisorT<T>&,  \
                                            const DivisorT<T>&);                                                    \
  template Mat<T> ap_matrix_metric<T>(const CycleBasis&, const std::vector<int>&, const std::vector<T>&,           \
                                      const std::vector<int>&);                                                     \
  template std::vector<BlockError> inverse_period_blocks<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&);      \
  template T tropical_laplacian_pairing<T>(const TropicalCurveT<T>&, const TropicalFunctionT<T>&, const PWQT<T>&);  \
  template double weak_laplacian_gap<T>(const TropicalCurveT<T>&, const TropicalFunctionT<T>&, const PWQT<T>&,      \
                                        const MetricGraphT<T>&);                                                    \
  template std::vector<T> foster_first_order<T>(const TropicalCurveT<T>&);                                          \
  template std::vector<T> tropical_foster<T>(const TropicalCurveT<T>&);                                             \
  template double foster_law_error<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&);                            \
  template MeasureT<T> canonical_defect_measure<T>(const TropicalCurveT<T>&);                                       \
  template CorrectionResidual lebesgue_correction<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, int);        \
  template CorrectionResidual canonical_correction<T>(const TropicalCurveT<T>&, const MetricGraphT<T>&, int);

TROPLACE_INSTANTIATE(double)
TROPLACE_INSTANTIATE(Rational)

}  // namespace troplace
