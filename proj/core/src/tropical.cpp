#include "troplace/tropical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>

#include "troplace/errors.hpp"

namespace troplace {

template <class T>
TropicalCurveT<T> TropicalCurveT<T>::make(Graph g, OrderedPartition pi, std::vector<T> len, bool normalize) {
  g.validate();
  pi.validate();
  if (static_cast<int>(len.size()) != g.n_edges()) throw SchemaError("one length per edge required");
  for (const auto& l : len)
    if (!(l > T(0))) throw SchemaError("edge lengths must be positive");
  TropicalCurveT tc;
  tc.minors = graded_minors(g, pi);
  tc.level = pi.levels();
  for (int k = 1; k <= pi.rank(); ++k) {
    T s(0);
    for (int e : pi.edges_at(k)) s += len[e];
    if (normalize) {
      for (int e : pi.edges_at(k)) len[e] /= s;
    } else if (!is_zero(T(s - T(1)), 1e-12)) {
      throw SchemaError("layer " + std::to_string(k) + " is not normalized to total length 1");
    }
  }
  tc.basis = admissible_basis(g, pi);
  tc.graph = std::move(g);
  tc.partition = std::move(pi);
  tc.length = std::move(len);
  return tc;
}

template <class T>
MetricGraphT<T> TropicalCurveT<T>::minor_metric(int k) const {
  const Minor& m = minor(k);
  MetricGraphT<T> mg{m.graph, {}};
  for (int e : m.edges) mg.length.push_back(length[e]);
  return mg;
}

template <class T>
PointT<T> minor_point(const TropicalCurveT<T>& tc, int k, const PointT<T>& x) {
  const Minor& m = tc.minor(k);
  const PointT<T> p = canonical_point(tc.graph, tc.length, x);
  if (p.is_vertex()) return PointT<T>::at_vertex(m.kappa[p.vertex]);
  const int lv = tc.level[p.edge];
  if (lv == k) return PointT<T>::on_edge(m.edge_pos[p.edge], p.offset);
  if (lv > k) return PointT<T>::at_vertex(m.kappa[tc.graph.edges[p.edge].tail]);
  return PointT<T>{-1, -1, T(0)};
}

template <class T>
LayeredMeasureT<T> pushout(const TropicalCurveT<T>& tc, const MeasureT<T>& mu) {
  LayeredMeasureT<T> out;
  for (int k = 1; k <= tc.levels(); ++k) {
    const Minor& m = tc.minor(k);
    MeasureT<T> part(m.graph.n_edges());
    for (const auto& [x, a] : mu.atoms) {
      auto p = minor_point(tc, k, x);
      if (p.is_vertex() || p.edge >= 0) part.add_atom(p, a);
    }
    for (int e = 0; e < static_cast<int>(mu.density.size()); ++e) {
      const T& rho = mu.density[e];
      if (rho == T(0)) continue;
      const int lv = tc.level[e];
      if (lv == k)
        part.density[m.edge_pos[e]] += rho;
      else if (lv > k)
        part.add_atom(PointT<T>::at_vertex(m.kappa[tc.graph.edges[e].tail]), T(rho * tc.length[e]));
    }
    out.parts.push_back(std::move(part));
  }
  return out;
}

template <class T>
MeasureT<T> flatten(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu) {
  if (static_cast<int>(mu.parts.size()) != tc.levels()) throw SchemaError("layered measure has the wrong number of parts");
  MeasureT<T> out(tc.graph.n_edges());
  for (int k = 1; k <= tc.levels(); ++k) {
    const Minor& m = tc.minor(k);
    const auto& part = mu.parts[k - 1];
    for (const auto& [p, a] : part.atoms) {
      if (p.is_vertex()) {
        // the last minor keeps every vertex of G
        if (k == tc.levels()) out.add_atom(PointT<T>::at_vertex(p.vertex), a);
        continue;
      }
      const int e = m.edges.at(p.edge);
      out.add_atom(canonical_point(tc.graph, tc.length, PointT<T>::on_edge(e, p.offset)), a);
    }
    for (int me = 0; me < static_cast<int>(part.density.size()); ++me) out.density[m.edges[me]] += part.density[me];
  }
  return out;
}

template <class T>
std::vector<std::vector<T>> mass_function(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu) {
  std::vector<std::vector<T>> out;
  for (int k = 1; k <= tc.levels(); ++k) {
    const Minor& m = tc.minor(k);
    const Components c = components(m.graph);
    const auto& part = mu.parts.at(k - 1);
    std::vector<T> mass(c.count, T(0));
    for (const auto& [p, a] : part.atoms) {
      const int v = p.is_vertex() ? p.vertex : m.graph.edges[p.edge].tail;
      mass[c.label[v]] += a;
    }
    for (int me = 0; me < static_cast<int>(part.density.size()); ++me)
      mass[c.label[m.graph.edges[me].tail]] += part.density[me] * tc.length[m.edges[me]];
    if (k > 1) {
      const Minor& prev = tc.minor(k - 1);
      std::vector<char> done(c.count, 0);
      for (int v = 0; v < tc.graph.n_vertices(); ++v) {
        const int h = c.label[m.kappa[v]];
        if (done[h]) continue;
        done[h] = 1;
        const int x = prev.kappa[v];
        for (const auto& [p, a] : mu.parts[k - 2].atoms)
          if (p.is_vertex() && p.vertex == x) mass[h] -= a;
      }
    }
    out.push_back(std::move(mass));
  }
  return out;
}

namespace {

template <class T>
double layered_scale(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu) {
  double s = 0;
  for (int k = 1; k <= static_cast<int>(mu.parts.size()); ++k) {
    for (const auto& a : mu.parts[k - 1].atoms) s += abs_d(a.second);
    for (int me = 0; me < static_cast<int>(mu.parts[k - 1].density.size()); ++me)
      s += abs_d(T(mu.parts[k - 1].density[me] * tc.length[tc.minor(k).edges[me]]));
  }
  return std::max(s, 1.0);
}

}  // namespace

template <class T>
bool has_mass_zero(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, double tol) {
  const double t = tol * layered_scale(tc, mu);
  for (const auto& lvl : mass_function(tc, mu))
    for (const auto& m : lvl)
      if (!is_zero(m, t)) return false;
  return true;
}

template <class T>
bool has_mass_one(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, double tol) {
  const double t = tol * layered_scale(tc, mu);
  const auto mf = mass_function(tc, mu);
  for (size_t k = 0; k < mf.size(); ++k)
    for (size_t h = 0; h < mf[k].size(); ++h) {
      const T target = (k == 0 && h == 0) ? T(1) : T(0);
      if (!is_zero(T(mf[k][h] - target), t)) return false;
    }
  return true;
}

template <class T>
PWQT<T> extend(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk) {
  const Minor& m = tc.minor(k);
  const Graph& g = tc.graph;
  PWQT<T> f;
  f.vertex_value.resize(g.n_vertices());
  for (int v = 0; v < g.n_vertices(); ++v) f.vertex_value[v] = fk.vertex_value.at(m.kappa[v]);
  f.pieces.resize(g.n_edges());
  for (int e = 0; e < g.n_edges(); ++e) {
    const T& l = tc.length[e];
    const T& a = f.vertex_value[g.edges[e].tail];
    const T& b = f.vertex_value[g.edges[e].head];
    const int lv = tc.level[e];
    if (lv == k)
      f.pieces[e] = fk.pieces.at(m.edge_pos[e]);
    else if (lv > k)
      f.pieces[e] = {Piece<T>{T(0), l, T(0), T(0), a}};
    else
      f.pieces[e] = {Piece<T>{T(0), l, T(0), (b - a) / l, a}};
  }
  return f;
}

template <class T>
T evaluate_extended(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk, const PointT<T>& x) {
  const PointT<T> p = canonical_point(tc.graph, tc.length, x);
  const Minor& m = tc.minor(k);
  if (p.is_vertex()) return fk.vertex_value.at(m.kappa[p.vertex]);
  const Edge& ed = tc.graph.edges[p.edge];
  const int lv = tc.level[p.edge];
  if (lv == k) return evaluate(m.graph, fk, PointT<T>::on_edge(m.edge_pos[p.edge], p.offset));
  const T a = fk.vertex_value.at(m.kappa[ed.tail]);
  if (lv > k) return a;
  const T b = fk.vertex_value.at(m.kappa[ed.head]);
  return a + (b - a) * p.offset / tc.length[p.edge];
}

template <class T>
T integrate_extended(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk, const MeasureT<T>& nu) {
  T acc(0);
  for (const auto& [p, a] : nu.atoms) acc += a * evaluate_extended(tc, k, fk, p);
  bool dense = false;
  for (const auto& d : nu.density)
    if (d != T(0)) dense = true;
  if (dense) {
    MeasureT<T> dens(tc.graph.n_edges());
    dens.density = nu.density;
    acc += integrate(tc.graph, extend(tc, k, fk), dens);
  }
  return acc;
}

template <class T>
MeasureT<T> div_transfer(const TropicalCurveT<T>& tc, int i, int k, const PWQT<T>& fi) {
  const Minor& mi = tc.minor(i);
  const Minor& mk = tc.minor(k);
  MeasureT<T> out(mk.graph.n_edges());
  for (int e : tc.partition.edges_at(i)) {
    const int me = mi.edge_pos[e];
    const Edge& ed = tc.graph.edges[e];
    const T st = outgoing_slope(fi, me, true), sh = outgoing_slope(fi, me, false);
    if (st != T(0)) out.add_atom(PointT<T>::at_vertex(mk.kappa[ed.tail]), T(-st));
    if (sh != T(0)) out.add_atom(PointT<T>::at_vertex(mk.kappa[ed.head]), T(-sh));
  }
  return out;
}

template <class T>
LayeredMeasureT<T> tropical_laplacian(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F) {
  if (static_cast<int>(F.parts.size()) != tc.levels()) throw SchemaError("tropical function has the wrong number of parts");
  LayeredMeasureT<T> out;
  for (int k = 1; k <= tc.levels(); ++k) {
    MeasureT<T> part = laplacian(tc.minor(k).graph, F.parts[k - 1]);
    for (int i = 1; i < k; ++i) part += div_transfer(tc, i, k, F.parts[i - 1]);
    out.parts.push_back(std::move(part));
  }
  return out;
}

template <class T>
double lower_harmonic_residual(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk) {
  const Minor& mk = tc.minor(k);
  double worst = 0;
  for (int i = 1; i < k; ++i) {
    const Minor& mi = tc.minor(i);
    std::vector<T> acc(mi.graph.n_vertices(), T(0));
    for (int e : tc.partition.edges_at(i)) {
      const Edge& ed = tc.graph.edges[e];
      const T s = (fk.vertex_value[mk.kappa[ed.head]] - fk.vertex_value[mk.kappa[ed.tail]]) / tc.length[e];
      acc[mi.kappa[ed.tail]] += s;
      acc[mi.kappa[ed.head]] -= s;
    }
    for (const auto& a : acc) worst = std::max(worst, abs_d(a));
  }
  return worst;
}

template <class T>
ArrangementReport is_harmonically_arranged(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, double tol) {
  ArrangementReport rep;
  for (int k = 2; k <= tc.levels(); ++k)
    rep.residual = std::max(rep.residual, lower_harmonic_residual(tc, k, F.parts.at(k - 1)));
  rep.arranged = rep.residual <= tol;
  return rep;
}

namespace {

// Least-norm constants per component of Γ^k making fk lower harmonic.
template <class T>
std::vector<T> arrangement_constants(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk, const Components& ck) {
  const Minor& mk = tc.minor(k);
  std::vector<int> row_offset(k, 0);
  int rows = 0;
  for (int i = 1; i < k; ++i) {
    row_offset[i] = rows;
    rows += tc.minor(i).graph.n_vertices();
  }
  if (rows == 0 || ck.count == 0) return std::vector<T>(ck.count, T(0));
  Mat<T> A = zeros<T>(rows, ck.count);
  std::vector<T> b(rows, T(0));
  double scale = 0;
  for (int i = 1; i < k; ++i) {
    const Minor& mi = tc.minor(i);
    for (int e : tc.partition.edges_at(i)) {
      const Edge& ed = tc.graph.edges[e];
      const int va = mk.kappa[ed.tail], vb = mk.kappa[ed.head];
      const int ca = ck.label[va], cb = ck.label[vb];
      const int rt = row_offset[i] + mi.kappa[ed.tail], rh = row_offset[i] + mi.kappa[ed.head];
      const T w = T(1) / tc.length[e];
      const T s = (fk.vertex_value[vb] - fk.vertex_value[va]) * w;
      A[rt][cb] += w;
      A[rt][ca] -= w;
      b[rt] -= s;
      A[rh][cb] -= w;
      A[rh][ca] += w;
      b[rh] += s;
      scale = std::max(scale, abs_d(s));
    }
  }
  auto sol = solve_consistent(A, b, 1e-12);
  if (sol.residual > 1e-7 * std::max(1.0, scale))
    throw NumericalError("harmonic rearrangement system inconsistent (residual " + std::to_string(sol.residual) + ")");
  return sol.x;
}

template <class T>
void add_component_constants(const Graph& mg, const Components& c, PWQT<T>& f, const std::vector<T>& K) {
  for (int v = 0; v < mg.n_vertices(); ++v) f.vertex_value[v] += K[c.label[v]];
  for (int e = 0; e < mg.n_edges(); ++e)
    for (auto& pc : f.pieces[e]) pc.c += K[c.label[mg.edges[e].tail]];
}

}  // namespace

template <class T>
RearrangementT<T> harmonic_rearrange(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F) {
  RearrangementT<T> out;
  out.f = F;
  for (int k = 1; k <= tc.levels(); ++k) {
    const Graph& mg = tc.minor(k).graph;
    const Components ck = components(mg);
    auto K = arrangement_constants(tc, k, F.parts.at(k - 1), ck);
    add_component_constants(mg, ck, out.f.parts[k - 1], K);
    out.constants.push_back(std::move(K));
  }
  return out;
}

template <class T>
Mat<T> period_block(const CycleBasis& basis, const std::vector<int>& level, const std::vector<T>& len, int i, int k) {
  const auto& Ji = basis.blocks.at(i - 1);
  const auto& Jk = basis.blocks.at(k - 1);
  const int top = std::max(i, k);
  Mat<T> out = zeros<T>(static_cast<int>(Ji.size()), static_cast<int>(Jk.size()));
  for (size_t e = 0; e < level.size(); ++e) {
    if (level[e] != top) continue;
    for (size_t a = 0; a < Ji.size(); ++a) {
      const int ga = basis.cycles[Ji[a]][e];
      if (!ga) continue;
      for (size_t b = 0; b < Jk.size(); ++b) {
        const int gb = basis.cycles[Jk[b]][e];
        if (gb) out[a][b] += len[e] * T(ga * gb);
      }
    }
  }
  return out;
}

template <class T>
Mat<T> ap_matrix(const CycleBasis& basis, const std::vector<int>& level, const std::vector<T>& len,
                 const std::vector<int>& path) {
  if (path.empty()) throw SchemaError("empty increasing sequence");
  Mat<T> acc = inverse(period_block(basis, level, len, path[0], path[0]));
  for (size_t s = 1; s < path.size(); ++s) {
    if (path[s] <= path[s - 1]) throw SchemaError("sequence must be strictly increasing");
    acc = matmul(matmul(acc, period_block(basis, level, len, path[s - 1], path[s])),
                 inverse(period_block(basis, level, len, path[s], path[s])));
  }
  if ((path.size() - 1) % 2 == 1)
    for (auto& row : acc)
      for (auto& v : row) v = -v;
  return acc;
}

std::vector<std::vector<int>> increasing_paths(const CycleBasis& basis, int i, int k) {
  std::vector<std::vector<int>> out;
  auto nonempty = [&](int l) { return !basis.blocks.at(l - 1).empty(); };
  if (i > k || !nonempty(i) || !nonempty(k)) return out;
  std::vector<int> cur{i};
  std::function<void(int)> rec = [&](int at) {
    if (at == k) {
      out.push_back(cur);
      return;
    }
    for (int nx = at + 1; nx <= k; ++nx) {
      if (!nonempty(nx)) continue;
      cur.push_back(nx);
      rec(nx);
      cur.pop_back();
    }
  };
  rec(i);
  return out;
}

namespace {

template <class T>
std::vector<T> cycle_pairing_with(const TropicalCurveT<T>& tc, int j, const std::vector<T>& alpha, double* scale) {
  const Minor& mj = tc.minor(j);
  if (alpha.size() != mj.edges.size()) throw SchemaError("one-form size differs from the minor edge count");
  std::vector<T> W(tc.basis.size(), T(0));
  double s = 0;
  for (int a = 0; a < tc.basis.size(); ++a)
    for (size_t me = 0; me < mj.edges.size(); ++me) {
      const int e = mj.edges[me];
      const int g = tc.basis.cycles[a][e];
      if (!g) continue;
      const T term = tc.length[e] * T(g) * alpha[me];
      W[a] += term;
      s += abs_d(term);
    }
  if (scale) *scale = std::max(s, 1e-300);
  return W;
}

template <class T>
void check_exact(const TropicalCurveT<T>& tc, int j, const std::vector<T>& W, double scale) {
  for (int m : tc.basis.blocks.at(j - 1))
    if (!is_zero(W[m], 1e-9 * scale)) throw InfeasibleError("one-form is not exact on the graded minor");
}

}  // namespace

template <class T>
std::vector<T> extend_exact_form(const TropicalCurveT<T>& tc, int j, const std::vector<T>& alpha) {
  double scale = 0;
  const auto W = cycle_pairing_with(tc, j, alpha, &scale);
  check_exact(tc, j, W, scale);
  const Minor& mj = tc.minor(j);
  std::vector<T> out(tc.graph.n_edges(), T(0));
  for (size_t me = 0; me < mj.edges.size(); ++me) out[mj.edges[me]] = alpha[me];
  // unknown coefficients for the blocks J^1..J^{j-1}; ω_i lives on π_i
  std::vector<int> idx, block_of;
  for (int i = 1; i < j; ++i)
    for (int m : tc.basis.blocks[i - 1]) idx.push_back(m), block_of.push_back(i);
  const int N = static_cast<int>(idx.size());
  if (N == 0) return out;
  Mat<T> A = zeros<T>(N, N);
  std::vector<T> rhs(N, T(0));
  for (int r = 0; r < N; ++r) {
    rhs[r] = -W[idx[r]];
    for (int c = 0; c < N; ++c)
      for (int e : tc.partition.edges_at(block_of[c])) {
        const int gm = tc.basis.cycles[idx[r]][e], gn = tc.basis.cycles[idx[c]][e];
        if (gm && gn) A[r][c] += tc.length[e] * T(gm * gn);
      }
  }
  const auto c = solve_square(A, rhs);
  for (int a = 0; a < N; ++a)
    for (int e : tc.partition.edges_at(block_of[a])) out[e] += c[a] * T(tc.basis.cycles[idx[a]][e]);
  return out;
}

template <class T>
std::vector<T> extend_exact_form_sum_product(const TropicalCurveT<T>& tc, int j, const std::vector<T>& alpha) {
  double scale = 0;
  const auto W = cycle_pairing_with(tc, j, alpha, &scale);
  check_exact(tc, j, W, scale);
  const Minor& mj = tc.minor(j);
  std::vector<T> out(tc.graph.n_edges(), T(0));
  for (size_t me = 0; me < mj.edges.size(); ++me) out[mj.edges[me]] = alpha[me];
  for (int i = 1; i < j; ++i) {
    const auto& Ji = tc.basis.blocks[i - 1];
    if (Ji.empty()) continue;
    std::vector<T> c(Ji.size(), T(0));
    for (int k = i; k <= tc.levels(); ++k) {
      const auto& Jk = tc.basis.blocks[k - 1];
      std::vector<T> Wk;
      for (int n : Jk) Wk.push_back(W[n]);
      for (const auto& p : increasing_paths(tc.basis, i, k)) {
        const auto v = matvec(ap_matrix(tc.basis, tc.level, tc.length, p), Wk);
        for (size_t a = 0; a < c.size(); ++a) c[a] -= v[a];
      }
    }
    for (int e : tc.partition.edges_at(i))
      for (size_t a = 0; a < Ji.size(); ++a) out[e] += c[a] * T(tc.basis.cycles[Ji[a]][e]);
  }
  return out;
}

namespace {

// Slope transfers cancel atoms whose rounding residue can exceed the solver's
// relative tolerance once nothing else is left on a component. Residues within
// tol·scale are moved onto the component's first vertex.
template <class T>
void settle_mass(const MetricGraphT<T>& mg, const Components& ck, MeasureT<T>& m, double scale, double tol) {
  if constexpr (std::is_same_v<T, double>) {
    std::vector<double> mass(ck.count, 0.0);
    for (const auto& [p, a] : m.atoms) mass[ck.label[p.is_vertex() ? p.vertex : mg.graph.edges[p.edge].tail]] += a;
    for (size_t e = 0; e < m.density.size(); ++e) mass[ck.label[mg.graph.edges[e].tail]] += m.density[e] * mg.length[e];
    for (int c = 0; c < ck.count; ++c) {
      if (mass[c] == 0 || std::abs(mass[c]) > tol * scale) continue;
      for (int v = 0; v < mg.graph.n_vertices(); ++v)
        if (ck.label[v] == c) {
          m.add_atom(PointT<T>::at_vertex(v), -mass[c]);
          break;
        }
    }
  } else {
    (void)mg, (void)ck, (void)m, (void)scale, (void)tol;
  }
}

template <class T>
double measure_scale(const MeasureT<T>& m, const std::vector<T>& len) {
  double s = 0;
  for (const auto& [p, a] : m.atoms) s += abs_d(a);
  for (size_t e = 0; e < m.density.size(); ++e) s += abs_d(T(m.density[e] * len[e]));
  return s;
}

template <class T>
TropicalFunctionT<T> cascade(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, const MeasureT<T>& nu,
                             std::vector<MeasureT<T>>* induced) {
  if (static_cast<int>(mu.parts.size()) != tc.levels()) throw SchemaError("layered measure has the wrong number of parts");
  const double tol = default_tolerance();
  if (!has_mass_zero(tc, mu, tol)) throw InfeasibleError("tropical Poisson data must have mass zero");
  const T nmass = nu.mass(tc.length);
  if (is_zero(nmass, tol)) throw InfeasibleError("normalizing measure has zero mass");
  TropicalFunctionT<T> F;
  for (int k = 1; k <= tc.levels(); ++k) {
    const auto mg = tc.minor_metric(k);
    const Components ck = components(mg.graph);
    MeasureT<T> rhs = mu.parts[k - 1];
    double scale = measure_scale(rhs, mg.length);
    for (int i = 1; i < k; ++i) {
      const auto d = div_transfer(tc, i, k, F.parts[i - 1]);
      scale += measure_scale(d, mg.length);
      rhs = rhs - d;
    }
    settle_mass(mg, ck, rhs, scale, tol);
    PWQT<T> f = solve_poisson(mg, rhs, NormalizationT<T>::pinned(PointT<T>::at_vertex(0)));
    add_component_constants(mg.graph, ck, f, arrangement_constants(tc, k, f, ck));
    f.add_constant(T(-integrate_extended(tc, k, f, nu) / nmass));
    F.parts.push_back(std::move(f));
    if (induced) induced->push_back(std::move(rhs));
  }
  return F;
}

}  // namespace

template <class T>
TropicalFunctionT<T> solve_tropical_poisson(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu,
                                            const MeasureT<T>& nu) {
  if (!is_zero(T(nu.mass(tc.length) - T(1)), default_tolerance()))
    throw InfeasibleError("normalizing measure must have mass one");
  return cascade<T>(tc, mu, nu, nullptr);
}

template <class T>
TropicalFunctionT<T> solve_tropical_poisson(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu,
                                            const LayeredMeasureT<T>& nu) {
  if (!has_mass_one(tc, nu, default_tolerance())) throw InfeasibleError("normalizing layered measure must have mass one");
  return cascade<T>(tc, mu, flatten(tc, nu), nullptr);
}

template <class T>
TropicalFunctionT<T> tropical_j(const TropicalCurveT<T>& tc, const PointT<T>& p, const PointT<T>& q,
                                const PointT<T>& x) {
  const int E = tc.graph.n_edges();
  const auto P = canonical_point(tc.graph, tc.length, p), Q = canonical_point(tc.graph, tc.length, q);
  const auto X = canonical_point(tc.graph, tc.length, x);
  if (P == Q) {
    TropicalFunctionT<T> z;
    for (int k = 1; k <= tc.levels(); ++k) {
      const auto mg = tc.minor_metric(k);
      z.parts.push_back(PWQT<T>::constant(mg.graph, mg.length, T(0)));
    }
    return z;
  }
  return cascade<T>(tc, pushout(tc, dirac(E, P) - dirac(E, Q)), dirac(E, X), nullptr);
}

template <class T>
TropicalFunctionT<T> tropical_green(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, const PointT<T>& x) {
  if (!has_mass_one(tc, mu, default_tolerance())) throw InfeasibleError("Green function needs a mass-one layered measure");
  LayeredMeasureT<T> rhs = pushout(tc, dirac(tc.graph.n_edges(), canonical_point(tc.graph, tc.length, x)));
  for (size_t k = 0; k < rhs.parts.size(); ++k) rhs.parts[k] = rhs.parts[k] - mu.parts.at(k);
  return cascade<T>(tc, rhs, flatten(tc, mu), nullptr);
}

template <class T>
std::vector<T> tropical_green_values(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, const PointT<T>& x,
                                     const PointT<T>& y) {
  const auto G = tropical_green(tc, mu, x);
  std::vector<T> out;
  for (int k = 1; k <= tc.levels(); ++k) out.push_back(evaluate_extended(tc, k, G.parts[k - 1], y));
  return out;
}

template <class T>
std::vector<MeasureT<T>> induced_divisors(const TropicalCurveT<T>& tc, const DivisorT<T>& d) {
  const int E = tc.graph.n_edges();
  std::vector<MeasureT<T>> out;
  cascade<T>(tc, pushout(tc, divisor_measure(E, d)), dirac(E, PointT<T>::at_vertex(0)), &out);
  return out;
}

template <class T>
std::vector<T> tropical_height(const TropicalCurveT<T>& tc, const DivisorT<T>& d1, const DivisorT<T>& d2) {
  for (const auto* d : {&d1, &d2}) {
    T deg(0);
    double s = 0;
    for (const auto& a : *d) deg += a.second, s += abs_d(a.second);
    if (!is_zero(deg, default_tolerance() * std::max(1.0, s))) throw InfeasibleError("height pairing needs degree-zero divisors");
  }
  std::vector<T> out(tc.levels(), T(0));
  if (d1.empty() || d2.empty()) return out;
  const auto D1 = induced_divisors(tc, d1), D2 = induced_divisors(tc, d2);
  for (int k = 1; k <= tc.levels(); ++k) {
    DivisorT<T> a = D1[k - 1].atoms, b = D2[k - 1].atoms;
    if (a.empty() || b.empty()) continue;
    out[k - 1] = height_pairing(tc.minor_metric(k), a, b);
  }
  return out;
}

template <class T>
MeasureT<T> canonical_measure_flat(const TropicalCurveT<T>& tc) {
  const int g = augmented_genus(tc.graph);
  if (g <= 0) throw InfeasibleError("canonical measure undefined in genus 0");
  MeasureT<T> out(tc.graph.n_edges());
  for (int k = 1; k <= tc.levels(); ++k) {
    const auto mg = tc.minor_metric(k);
    const auto mu = foster(mg);
    for (size_t me = 0; me < mu.size(); ++me) {
      const int e = tc.minor(k).edges[me];
      out.density[e] = mu[me] / tc.length[e] / T(g);
    }
  }
  for (int v = 0; v < tc.graph.n_vertices(); ++v)
    if (tc.graph.genus[v]) out.add_atom(PointT<T>::at_vertex(v), T(tc.graph.genus[v]) / T(g));
  return out;
}

template <class T>
LayeredMeasureT<T> canonical_measure_tropical(const TropicalCurveT<T>& tc) {
  return pushout(tc, canonical_measure_flat(tc));
}

#define TROPLACE_INSTANTIATE(T)                                                                                     \
  template struct TropicalCurveT<T>;                                                                                \
  template PointT<T> minor_point<T>(const TropicalCurveT<T>&, int, const PointT<T>&);                               \
  template LayeredMeasureT<T> pushout<T>(const TropicalCurveT<T>&, const MeasureT<T>&);                             \
  template MeasureT<T> flatten<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&);                             \
  template std::vector<std::vector<T>> mass_function<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&);       \
  template bool has_mass_zero<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&, double);                      \
  template bool has_mass_one<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&, double);                       \
  template PWQT<T> extend<T>(const TropicalCurveT<T>&, int, const PWQT<T>&);                                        \
  template T evaluate_extended<T>(const TropicalCurveT<T>&, int, const PWQT<T>&, const PointT<T>&);                 \
  template T integrate_extended<T>(const TropicalCurveT<T>&, int, const PWQT<T>&, const MeasureT<T>&);              \
  template MeasureT<T> div_transfer<T>(const TropicalCurveT<T>&, int, int, const PWQT<T>&);                         \
  template LayeredMeasureT<T> tropical_laplacian<T>(const TropicalCurveT<T>&, const TropicalFunctionT<T>&);         \
  template double lower_harmonic_residual<T>(const TropicalCurveT<T>&, int, const PWQT<T>&);                        \
  template ArrangementReport is_harmonically_arranged<T>(const TropicalCurveT<T>&, const TropicalFunctionT<T>&,     \
                                                         double);                                                   \
  template RearrangementT<T> harmonic_rearrange<T>(const TropicalCurveT<T>&, const TropicalFunctionT<T>&);          \
  template Mat<T> period_block<T>(const CycleBasis&, const std::vector<int>&, const std::vector<T>&, int, int);      \
  template Mat<T> ap_matrix<T>(const CycleBasis&, const std::vector<int>&, const std::vector<T>&,                   \
                               const std::vector<int>&);                                                            \
  template std::vector<T> extend_exact_form<T>(const TropicalCurveT<T>&, int, const std::vector<T>&);               \
  template std::vector<T> extend_exact_form_sum_product<T>(const TropicalCurveT<T>&, int, const std::vector<T>&);   \
  template TropicalFunctionT<T> solve_tropical_poisson<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&,      \
                                                          const MeasureT<T>&);                                      \
  template TropicalFunctionT<T> solve_tropical_poisson<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&,      \
                                                          const LayeredMeasureT<T>&);                               \
  template TropicalFunctionT<T> tropical_j<T>(const TropicalCurveT<T>&, const PointT<T>&, const PointT<T>&,         \
                                              const PointT<T>&);                                                    \
  template TropicalFunctionT<T> tropical_green<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&,              \
                                                  const PointT<T>&);                                                \
  template std::vector<T> tropical_green_values<T>(const TropicalCurveT<T>&, const LayeredMeasureT<T>&,             \
                                                   const PointT<T>&, const PointT<T>&);                             \
  template std::vector<MeasureT<T>> induced_divisors<T>(const TropicalCurveT<T>&, const DivisorT<T>&);              \
  template std::vector<T> tropical_height<T>(const TropicalCurveT<T>&, const DivisorT<T>&, const DivisorT<T>&);     \
  template MeasureT<T> canonical_measure_flat<T>(const TropicalCurveT<T>&);                                         \
  template LayeredMeasureT<T> canonical_measure_tropical<T>(const TropicalCurveT<T>&);
TROPLACE_INSTANTIATE(double)
TROPLACE_INSTANTIATE(Rational)
#undef TROPLACE_INSTANTIATE

}  // namespace troplace
