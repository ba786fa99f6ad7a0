#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "troplace/graph.hpp"
#include "troplace/measure.hpp"
#include "troplace/metric_graph.hpp"

namespace troplace::testing {

// Connected multigraph with loops and parallels allowed.
inline Graph random_graph(std::mt19937_64& rng, int max_edges = 8) {
  std::uniform_int_distribution<int> nv(2, 5);
  Graph g;
  const int n = nv(rng);
  for (int v = 0; v < n; ++v) g.add_vertex("v" + std::to_string(v));
  int id = 0;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    g.add_edge("e" + std::to_string(id++), pick(rng), v);
  }
  std::uniform_int_distribution<int> extra(1, std::max(1, max_edges - (n - 1)));
  std::uniform_int_distribution<int> any(0, n - 1);
  const int k = std::min(extra(rng), max_edges - (n - 1));
  for (int i = 0; i < k; ++i) g.add_edge("e" + std::to_string(id++), any(rng), any(rng));
  return g;
}

inline std::vector<double> random_lengths(std::mt19937_64& rng, int n, double lo = 0.1, double hi = 10) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(static_cast<size_t>(n));
  for (auto& l : out) l = u(rng);
  return out;
}

// Every edge gets a level in 1..levels; the last level is the finitary part
// when `finitary` is set. Empty levels are dropped.
inline OrderedPartition random_partition(std::mt19937_64& rng, int n_edges, int levels, bool finitary) {
  std::uniform_int_distribution<int> pick(0, levels - 1);
  std::vector<std::vector<int>> by(static_cast<size_t>(levels));
  for (int e = 0; e < n_edges; ++e) by[static_cast<size_t>(pick(rng))].push_back(e);
  OrderedPartition pi;
  pi.ambient = n_edges;
  for (int j = 0; j < levels; ++j) {
    auto& l = by[static_cast<size_t>(j)];
    if (finitary && j == levels - 1)
      pi.finite = l;
    else if (!l.empty())
      pi.layers.push_back(l);
  }
  return pi;
}

inline Point random_point(std::mt19937_64& rng, const Graph& g, const std::vector<double>& len) {
  std::uniform_real_distribution<double> u(0, 1);
  if (u(rng) < 0.3) return Point::at_vertex(std::uniform_int_distribution<int>(0, g.n_vertices() - 1)(rng));
  const int e = std::uniform_int_distribution<int>(0, g.n_edges() - 1)(rng);
  return Point::on_edge(e, len[static_cast<size_t>(e)] * (0.05 + 0.9 * u(rng)));
}

inline Graph theta() {
  Graph g;
  g.add_vertex("u");
  g.add_vertex("v");
  for (int i = 1; i <= 3; ++i) g.add_edge("e" + std::to_string(i), 0, 1);
  return g;
}

inline Graph circle() {
  Graph g;
  g.add_vertex("o");
  g.add_edge("e", 0, 0);
  return g;
}

}  // namespace troplace::testing

namespace troplace::testing {

// ∫ f dμ for f affine between consecutive marks on every edge: Gauss-Legendre
// per panel, atoms evaluated directly. Independent of the solver's quadrature.
template <class F>
double integrate_piecewise(const MetricGraph& mg, const GraphMeasure& mu, const std::vector<Point>& marks, F f) {
  static constexpr std::array<double, 3> node{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weight{5.0 / 9, 8.0 / 9, 5.0 / 9};
  double acc = 0;
  for (const auto& [p, m] : mu.atoms) acc += m * f(p);
  for (int e = 0; e < mg.graph.n_edges(); ++e) {
    const double rho = mu.density[static_cast<size_t>(e)];
    if (rho == 0) continue;
    const double L = mg.length[static_cast<size_t>(e)];
    std::vector<double> cut{0, L};
    for (const auto& p : marks)
      if (!p.is_vertex() && p.edge == e) cut.push_back(p.offset);
    for (const auto& [p, m] : mu.atoms)
      if (!p.is_vertex() && p.edge == e) cut.push_back(p.offset);
    std::sort(cut.begin(), cut.end());
    for (size_t i = 0; i + 1 < cut.size(); ++i) {
      const double a = cut[i], b = cut[i + 1];
      if (b - a <= 0) continue;
      for (size_t k = 0; k < 3; ++k)
        acc += rho * weight[k] * (b - a) / 2 * f(Point::on_edge(e, (a + b) / 2 + (b - a) / 2 * node[k]));
    }
  }
  return acc;
}

// Random signed measure: densities and atoms, total mass `mass`.
inline GraphMeasure random_measure(std::mt19937_64& rng, const MetricGraph& mg, double mass) {
  std::uniform_real_distribution<double> u(-1, 1);
  GraphMeasure m(mg.graph.n_edges());
  for (auto& d : m.density) d = u(rng);
  for (int i = 0; i < 2; ++i) m.add_atom(random_point(rng, mg.graph, mg.length), u(rng));
  const double fix = mass - m.mass(mg.length);
  m.add_atom(Point::at_vertex(0), fix);
  return m;
}

}  // namespace troplace::testing
