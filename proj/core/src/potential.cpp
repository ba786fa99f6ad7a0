#include "troplace/potential.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <string>

#include "troplace/errors.hpp"
#include "troplace/linalg.hpp"

namespace troplace {

double default_tolerance() {
  if (const char* env = std::getenv("TROPLACE_TOL")) {
    try {
      double v = std::stod(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  return 1e-9;
}

namespace {

template <class T>
int component_of(const Graph& g, const Components& c, const PointT<T>& p) {
  return p.is_vertex() ? c.label[p.vertex] : c.label[g.edges[p.edge].tail];
}

template <class T>
void shift_component(const Graph& g, const Components& c, int comp, PWQT<T>& f, const T& k) {
  for (int v = 0; v < g.n_vertices(); ++v)
    if (c.label[v] == comp) f.vertex_value[v] += k;
  for (int e = 0; e < g.n_edges(); ++e)
    if (c.label[g.edges[e].tail] == comp)
      for (auto& pc : f.pieces[e]) pc.c += k;
}

}  // namespace

template <class T>
PWQT<T> solve_poisson(const MetricGraphT<T>& mg, const MeasureT<T>& mu, const NormalizationT<T>& norm) {
  const Graph& g = mg.graph;
  const int V = g.n_vertices(), E = g.n_edges();
  const double tol = default_tolerance();
  const Components comps = components(g);

  std::vector<std::pair<PointT<T>, T>> atoms;
  std::vector<std::vector<T>> cuts(E);
  for (const auto& [p, m] : mu.atoms) {
    auto q = canonical_point(g, mg.length, p);
    if (!q.is_vertex()) cuts[q.edge].push_back(q.offset);
    atoms.emplace_back(q, m);
  }
  PointT<T> pin = PointT<T>::at_vertex(0);
  if (norm.kind == NormalizationT<T>::Pin) {
    pin = canonical_point(g, mg.length, norm.pin);
    if (!pin.is_vertex()) cuts[pin.edge].push_back(pin.offset);
  }
  // nodes: vertices first, then interior cut points edge by edge
  std::vector<int> first_node(E, 0);
  int N = V;
  for (int e = 0; e < E; ++e) {
    auto& c = cuts[e];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    first_node[e] = N;
    N += static_cast<int>(c.size());
  }
  auto node_of = [&](const PointT<T>& p) {
    if (p.is_vertex()) return p.vertex;
    const auto& c = cuts[p.edge];
    auto it = std::lower_bound(c.begin(), c.end(), p.offset);
    return first_node[p.edge] + static_cast<int>(it - c.begin());
  };
  std::vector<int> node_comp(N);
  for (int v = 0; v < V; ++v) node_comp[v] = comps.label[v];
  for (int e = 0; e < E; ++e)
    for (size_t i = 0; i < cuts[e].size(); ++i) node_comp[first_node[e] + static_cast<int>(i)] = comps.label[g.edges[e].tail];

  struct Seg {
    int a, b;
    T s0, s1;
  };
  std::vector<std::vector<Seg>> segs(E);
  Mat<T> K = zeros<T>(N, N);
  std::vector<T> rhs(N, T(0));
  std::vector<double> scale(comps.count, 0.0);
  for (const auto& [p, m] : atoms) {
    rhs[node_of(p)] += m;
    scale[component_of(g, comps, p)] += abs_d(m);
  }
  for (int e = 0; e < E; ++e) {
    const T rho = e < static_cast<int>(mu.density.size()) ? mu.density[e] : T(0);
    std::vector<T> pos{T(0)};
    std::vector<int> nodes{g.edges[e].tail};
    for (size_t i = 0; i < cuts[e].size(); ++i) {
      pos.push_back(cuts[e][i]);
      nodes.push_back(first_node[e] + static_cast<int>(i));
    }
    pos.push_back(mg.length[e]);
    nodes.push_back(g.edges[e].head);
    for (size_t i = 0; i + 1 < pos.size(); ++i) {
      const int a = nodes[i], b = nodes[i + 1];
      const T h = pos[i + 1] - pos[i];
      const T w = T(1) / h;
      K[a][a] += w;
      K[b][b] += w;
      K[a][b] -= w;
      K[b][a] -= w;
      const T half = rho * h / T(2);
      rhs[a] += half;
      rhs[b] += half;
      segs[e].push_back(Seg{a, b, pos[i], pos[i + 1]});
    }
    scale[comps.label[g.edges[e].tail]] += abs_d(T(rho * mg.length[e]));
  }
  // solvability: zero mass on every component
  std::vector<T> cmass(comps.count, T(0));
  for (int i = 0; i < N; ++i) cmass[node_comp[i]] += rhs[i];
  for (int c = 0; c < comps.count; ++c)
    if (!is_zero(cmass[c], tol * std::max(scale[c], 1e-300)))
      throw InfeasibleError("Poisson data must have mass zero on every connected component (residual " +
                            std::to_string(to_double(cmass[c])) + ")");

  std::vector<int> pinned(comps.count, -1);
  if (norm.kind == NormalizationT<T>::Pin) pinned[component_of(g, comps, pin)] = node_of(pin);
  for (int v = 0; v < V; ++v)
    if (pinned[comps.label[v]] < 0) pinned[comps.label[v]] = v;
  std::vector<int> red(N, -1);
  int n = 0;
  for (int i = 0; i < N; ++i)
    if (pinned[node_comp[i]] != i) red[i] = n++;
  Mat<T> A = zeros<T>(n, n);
  std::vector<T> b(n, T(0));
  for (int i = 0; i < N; ++i) {
    if (red[i] < 0) continue;
    b[red[i]] = rhs[i];
    for (int j = 0; j < N; ++j)
      if (red[j] >= 0 && K[i][j] != T(0)) A[red[i]][red[j]] = K[i][j];
  }
  std::vector<T> x = n ? solve_spd(std::move(A), std::move(b)) : std::vector<T>{};
  std::vector<T> u(N, T(0));
  for (int i = 0; i < N; ++i)
    if (red[i] >= 0) u[i] = x[red[i]];

  PWQT<T> f;
  f.vertex_value.assign(u.begin(), u.begin() + V);
  f.pieces.resize(E);
  for (int e = 0; e < E; ++e) {
    const T rho = e < static_cast<int>(mu.density.size()) ? mu.density[e] : T(0);
    for (const auto& s : segs[e]) {
      const T h = s.s1 - s.s0;
      f.pieces[e].push_back(Piece<T>{s.s0, s.s1, -rho / T(2), (u[s.b] - u[s.a]) / h + rho * h / T(2), u[s.a]});
    }
  }

  if (norm.kind == NormalizationT<T>::Integral) {
    std::vector<T> nm(comps.count, T(0)), ni(comps.count, T(0));
    T total(0);
    double nscale = 0;
    for (const auto& [p, m] : norm.nu.atoms) {
      auto q = canonical_point(g, mg.length, p);
      const int c = component_of(g, comps, q);
      nm[c] += m;
      ni[c] += m * evaluate(g, f, q);
      total += m;
      nscale += abs_d(m);
    }
    for (int e = 0; e < static_cast<int>(norm.nu.density.size()) && e < E; ++e) {
      const T& d = norm.nu.density[e];
      if (d == T(0)) continue;
      const int c = comps.label[g.edges[e].tail];
      T s(0);
      for (const auto& pc : f.pieces[e]) s += integrate_piece(pc, T(0), pc.length());
      nm[c] += d * mg.length[e];
      ni[c] += d * s;
      total += d * mg.length[e];
      nscale += abs_d(T(d * mg.length[e]));
    }
    if (is_zero(total, tol * std::max(nscale, 1e-300)))
      throw InfeasibleError("normalizing measure has zero total mass");
    for (int c = 0; c < comps.count; ++c)
      if (!is_zero(nm[c], tol * std::max(nscale, 1e-300))) shift_component(g, comps, c, f, T(-ni[c] / nm[c]));
  }
  return f;
}

template <class T>
T j_function(const MetricGraphT<T>& mg, const PointT<T>& p, const PointT<T>& q, const PointT<T>& x,
             const PointT<T>& y) {
  const Graph& g = mg.graph;
  const auto P = canonical_point(g, mg.length, p), Q = canonical_point(g, mg.length, q),
             X = canonical_point(g, mg.length, x), Y = canonical_point(g, mg.length, y);
  const Components c = components(g);
  const int cp = component_of(g, c, P);
  if (component_of(g, c, Q) != cp || component_of(g, c, X) != cp || component_of(g, c, Y) != cp)
    throw DomainError("j-function points lie in different components");
  if (P == Q || X == Y) return T(0);
  MeasureT<T> mu(g.n_edges());
  mu.add_atom(P, T(1));
  mu.add_atom(Q, T(-1));
  auto f = solve_poisson(mg, mu, NormalizationT<T>::pinned(X));
  return evaluate(g, f, Y);
}

template <class T>
PWQT<T> green_function(const MetricGraphT<T>& mg, const MeasureT<T>& mu, const PointT<T>& x) {
  const T m = mu.mass(mg.length);
  if (!is_zero(T(m - T(1)), default_tolerance())) throw InfeasibleError("Green function needs a measure of mass 1");
  MeasureT<T> rhs = dirac(mg.graph.n_edges(), canonical_point(mg.graph, mg.length, x)) - mu;
  return solve_poisson(mg, rhs, NormalizationT<T>::integral(mu));
}

template <class T>
T green(const MetricGraphT<T>& mg, const MeasureT<T>& mu, const PointT<T>& x, const PointT<T>& y) {
  return evaluate(mg.graph, green_function(mg, mu, x), canonical_point(mg.graph, mg.length, y));
}

template <class T>
T height_pairing(const MetricGraphT<T>& mg, const DivisorT<T>& d1, const DivisorT<T>& d2) {
  T deg1(0), deg2(0);
  double s1 = 0, s2 = 0;
  for (const auto& a : d1) deg1 += a.second, s1 += abs_d(a.second);
  for (const auto& a : d2) deg2 += a.second, s2 += abs_d(a.second);
  const double tol = default_tolerance();
  if (!is_zero(deg1, tol * std::max(s1, 1.0)) || !is_zero(deg2, tol * std::max(s2, 1.0)))
    throw InfeasibleError("height pairing needs degree-zero divisors");
  if (d1.empty() || d2.empty()) return T(0);
  auto f1 = solve_poisson(mg, divisor_measure(mg.graph.n_edges(), d1), NormalizationT<T>::pinned(PointT<T>::at_vertex(0)));
  T acc(0);
  for (const auto& [p, c] : d2) acc += c * evaluate(mg.graph, f1, canonical_point(mg.graph, mg.length, p));
  return acc;
}

template <class T>
T dirichlet_pairing(const MetricGraphT<T>& mg, const PWQT<T>& f1, const PWQT<T>& f2) {
  T acc(0);
  for (int e = 0; e < mg.graph.n_edges(); ++e) {
    std::vector<T> bp{T(0), mg.length[e]};
    for (const auto& pc : f1.pieces[e]) bp.push_back(pc.s1);
    for (const auto& pc : f2.pieces[e]) bp.push_back(pc.s1);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    auto deriv = [](const std::vector<Piece<T>>& ps, const T& s, const T& mid) {
      for (const auto& pc : ps)
        if (mid >= pc.s0 && mid <= pc.s1) return pc.slope(T(s - pc.s0));
      return ps.back().slope(T(s - ps.back().s0));
    };
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
      const T x = bp[i], y = bp[i + 1], m = (x + y) / T(2), h = y - x;
      if (h <= T(0)) continue;
      // Simpson is exact for the product of two affine derivatives
      T px = deriv(f1.pieces[e], x, m) * deriv(f2.pieces[e], x, m);
      T pm = deriv(f1.pieces[e], m, m) * deriv(f2.pieces[e], m, m);
      T py = deriv(f1.pieces[e], y, m) * deriv(f2.pieces[e], y, m);
      acc += h / T(6) * (px + T(4) * pm + py);
    }
  }
  return acc;
}

double height_pairing_dirichlet(const MetricGraph& mg, const Divisor& d1, const Divisor& d2) {
  const auto pin = Normalization::pinned(Point::at_vertex(0));
  auto f1 = solve_poisson(mg, divisor_measure(mg.graph.n_edges(), d1), pin);
  auto f2 = solve_poisson(mg, divisor_measure(mg.graph.n_edges(), d2), pin);
  return dirichlet_pairing(mg, f1, f2);
}

double height_pairing_hodge(const MetricGraph& mg, const Divisor& d1, const Divisor& d2) {
  const Graph& g = mg.graph;
  const int V = g.n_vertices(), E = g.n_edges();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(V, E);
  for (int e = 0; e < E; ++e) {
    B(g.edges[e].head, e) += 1;
    B(g.edges[e].tail, e) -= 1;
  }
  auto lift = [&](const Divisor& d) {
    Eigen::VectorXd D = Eigen::VectorXd::Zero(V);
    for (const auto& [p, c] : d) {
      auto q = canonical_point(g, mg.length, p);
      if (!q.is_vertex()) throw DomainError("Hodge route of the height pairing needs vertex-supported divisors");
      D(q.vertex) += c;
    }
    Eigen::VectorXd a = B.completeOrthogonalDecomposition().solve(D);
    if ((B * a - D).lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, D.lpNorm<Eigen::Infinity>()))
      throw InfeasibleError("divisor is not a boundary (nonzero degree on a component)");
    return a;
  };
  Eigen::VectorXd a1 = lift(d1), a2 = lift(d2);
  Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(mg.length.data(), E);
  double val = (a1.array() * l.array() * a2.array()).sum();
  const CycleBasis basis = cycle_basis(g);
  if (basis.size() > 0) {
    const PeriodMatrix pm = period_matrix(mg, basis);
    Eigen::VectorXd p1 = pm.P * a1, p2 = pm.P * a2;
    val -= p1.dot(pm.M.ldlt().solve(p2));
  }
  return val;
}

double effective_resistance(const MetricGraph& mg, const Point& p, const Point& q) {
  Divisor d{{p, 1.0}, {q, -1.0}};
  return height_pairing(mg, d, d);
}

double measure_distance(const MetricGraph& mg, const GraphMeasure& a, const GraphMeasure& b) {
  GraphMeasure d = a - b;
  GraphMeasure merged(mg.graph.n_edges());
  for (const auto& [p, m] : d.atoms) merged.add_atom(canonical_point(mg.graph, mg.length, p), m);
  double worst = 0;
  for (const auto& at : merged.atoms) worst = std::max(worst, std::abs(at.second));
  for (int e = 0; e < mg.graph.n_edges(); ++e) {
    double de = e < static_cast<int>(d.density.size()) ? d.density[e] : 0.0;
    worst = std::max(worst, std::abs(de) * mg.length[e]);
  }
  return worst;
}

#define TROPLACE_INSTANTIATE(T)                                                                                  \
  template PWQT<T> solve_poisson<T>(const MetricGraphT<T>&, const MeasureT<T>&, const NormalizationT<T>&);      \
  template T j_function<T>(const MetricGraphT<T>&, const PointT<T>&, const PointT<T>&, const PointT<T>&,         \
                           const PointT<T>&);                                                                    \
  template PWQT<T> green_function<T>(const MetricGraphT<T>&, const MeasureT<T>&, const PointT<T>&);             \
  template T green<T>(const MetricGraphT<T>&, const MeasureT<T>&, const PointT<T>&, const PointT<T>&);          \
  template T height_pairing<T>(const MetricGraphT<T>&, const DivisorT<T>&, const DivisorT<T>&);                 \
  template T dirichlet_pairing<T>(const MetricGraphT<T>&, const PWQT<T>&, const PWQT<T>&);
TROPLACE_INSTANTIATE(double)
TROPLACE_INSTANTIATE(Rational)
#undef TROPLACE_INSTANTIATE

}  // namespace troplace
