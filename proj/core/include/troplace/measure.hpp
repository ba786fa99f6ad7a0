#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "troplace/errors.hpp"
#include "troplace/graph.hpp"
#include "troplace/rational.hpp"

namespace troplace {

// A point of a metric graph: a vertex, or an edge plus an arclength offset
// measured from the tail.
template <class T>
struct PointT {
  int vertex = -1;
  int edge = -1;
  T offset = T(0);

  static PointT at_vertex(int v) { return PointT{v, -1, T(0)}; }
  static PointT on_edge(int e, T s) { return PointT{-1, e, s}; }
  bool is_vertex() const { return vertex >= 0; }
  friend bool operator==(const PointT& a, const PointT& b) {
    return a.vertex == b.vertex && a.edge == b.edge && (a.is_vertex() || a.offset == b.offset);
  }
};

using Point = PointT<double>;

template <class T, class S>
PointT<T> convert_point(const PointT<S>& p) {
  return PointT<T>{p.vertex, p.edge, scalar_cast<T>(p.offset)};
}

// Collapse offsets at the edge ends onto the end vertices.
template <class T>
PointT<T> canonical_point(const Graph& g, const std::vector<T>& len, PointT<T> p) {
  if (p.is_vertex()) {
    if (p.vertex >= g.n_vertices()) throw SchemaError("point at unknown vertex");
    return p;
  }
  if (p.edge < 0 || p.edge >= g.n_edges()) throw SchemaError("point on unknown edge");
  const T& L = len[p.edge];
  if (p.offset < T(0) || p.offset > L) throw SchemaError("point offset outside the edge");
  if (p.offset == T(0)) return PointT<T>::at_vertex(g.edges[p.edge].tail);
  if (p.offset == L) return PointT<T>::at_vertex(g.edges[p.edge].head);
  return p;
}

// Measures of the class g dλ + Σ a_x δ_x with g constant on each edge.
template <class T>
struct MeasureT {
  std::vector<std::pair<PointT<T>, T>> atoms;
  std::vector<T> density;  // per edge, w.r.t. arclength

  MeasureT() = default;
  explicit MeasureT(int n_edges) : density(n_edges, T(0)) {}

  void add_atom(const PointT<T>& p, const T& m) {
    for (auto& [q, a] : atoms)
      if (q == p) {
        a += m;
        return;
      }
    atoms.emplace_back(p, m);
  }
  MeasureT& operator+=(const MeasureT& o) {
    if (density.size() < o.density.size()) density.resize(o.density.size(), T(0));
    for (size_t e = 0; e < o.density.size(); ++e) density[e] += o.density[e];
    for (const auto& [p, m] : o.atoms) add_atom(p, m);
    return *this;
  }
  MeasureT& operator*=(const T& s) {
    for (auto& d : density) d *= s;
    for (auto& a : atoms) a.second *= s;
    return *this;
  }
  friend MeasureT operator+(MeasureT a, const MeasureT& b) { return a += b; }
  friend MeasureT operator-(MeasureT a, MeasureT b) {
    b *= T(-1);
    return a += b;
  }
  friend MeasureT operator*(T s, MeasureT a) { return a *= s; }

  template <class L>
  T mass(const std::vector<L>& len) const {
    T m(0);
    for (const auto& a : atoms) m += a.second;
    for (size_t e = 0; e < density.size(); ++e) m += density[e] * T(len[e]);
    return m;
  }
};

using GraphMeasure = MeasureT<double>;


template <class T>
using DivisorT = std::vector<std::pair<PointT<T>, T>>;

template <class T>
MeasureT<T> divisor_measure(int n_edges, const DivisorT<T>& d) {
  MeasureT<T> m(n_edges);
  for (const auto& [p, c] : d) m.add_atom(p, c);
  return m;
}
using Divisor = DivisorT<double>;

template <class T>
MeasureT<T> dirac(int n_edges, const PointT<T>& p, T mass = T(1)) {
  MeasureT<T> m(n_edges);
  m.add_atom(p, mass);
  return m;
}

// Piecewise quadratic function: on each piece f(s) = a t² + b t + c with
// t = s - s0 the local arclength from the piece start.
template <class T>
struct Piece {
  T s0, s1, a, b, c;
  T length() const { return s1 - s0; }
  T at(const T& t) const { return (a * t + b) * t + c; }
  T slope(const T& t) const { return T(2) * a * t + b; }
};

template <class T>
struct PWQT {
  std::vector<std::vector<Piece<T>>> pieces;  // per edge, ordered along the edge
  std::vector<T> vertex_value;

  // Affine interpolation of vertex values along each edge.
  template <class L>
  static PWQT affine(const Graph& g, const std::vector<L>& len, const std::vector<T>& values) {
    PWQT f;
    f.vertex_value = values;
    f.pieces.resize(g.n_edges());
    for (int e = 0; e < g.n_edges(); ++e) {
      const T l(len[e]);
      const T& a = values[g.edges[e].tail];
      const T& b = values[g.edges[e].head];
      f.pieces[e].push_back(Piece<T>{T(0), l, T(0), (b - a) / l, a});
    }
    return f;
  }
  template <class L>
  static PWQT constant(const Graph& g, const std::vector<L>& len, T c) {
    return affine(g, len, std::vector<T>(g.n_vertices(), c));
  }
  void add_constant(const T& k) {
    for (auto& v : vertex_value) v += k;
    for (auto& ps : pieces)
      for (auto& p : ps) p.c += k;
  }
};

using PWQFunction = PWQT<double>;

template <class T>
T evaluate(const Graph& g, const PWQT<T>& f, const PointT<T>& p) {
  (void)g;
  if (p.is_vertex()) return f.vertex_value.at(p.vertex);
  const auto& ps = f.pieces.at(p.edge);
  if (ps.empty()) throw NumericalError("function has no pieces on edge");
  const T& s = p.offset;
  for (const auto& pc : ps)
    if (s <= pc.s1) return pc.at(s - pc.s0);
  return ps.back().at(s - ps.back().s0);
}

// Outgoing slope of f along edge e at its tail (at_tail) or head.
template <class T>
T outgoing_slope(const PWQT<T>& f, int e, bool at_tail) {
  const auto& ps = f.pieces.at(e);
  if (at_tail) return ps.front().slope(T(0));
  const auto& last = ps.back();
  return -last.slope(last.length());
}

template <class T>
T integrate_piece(const Piece<T>& p, const T& from, const T& to) {
  auto prim = [&](const T& t) -> T { return ((p.a * t / T(3) + p.b / T(2)) * t + p.c) * t; };
  return prim(to) - prim(from);
}

template <class T>
T integrate(const Graph& g, const PWQT<T>& f, const MeasureT<T>& nu) {
  T acc(0);
  for (const auto& [p, m] : nu.atoms) acc += m * evaluate(g, f, p);
  for (size_t e = 0; e < nu.density.size(); ++e) {
    if (nu.density[e] == T(0)) continue;
    T s(0);
    for (const auto& pc : f.pieces[e]) s += integrate_piece(pc, T(0), pc.length());
    acc += nu.density[e] * s;
  }
  return acc;
}

// Laplacian Δf = -f'' dλ - Σ_x (Σ outgoing slopes at x) δ_x.
// The second derivative must be constant along each edge.
template <class T>
MeasureT<T> laplacian(const Graph& g, const PWQT<T>& f) {
  MeasureT<T> mu(g.n_edges());
  std::vector<T> at_vertex(g.n_vertices(), T(0));
  for (int e = 0; e < g.n_edges(); ++e) {
    const auto& ps = f.pieces.at(e);
    const T a = ps.front().a;
    for (const auto& pc : ps)
      if (pc.a != a) throw NumericalError("second derivative varies along an edge; subdivide before taking the Laplacian");
    mu.density[e] = T(-2) * a;
    at_vertex[g.edges[e].tail] -= outgoing_slope(f, e, true);
    at_vertex[g.edges[e].head] -= outgoing_slope(f, e, false);
    for (size_t i = 0; i + 1 < ps.size(); ++i) {
      // kink at an interior breakpoint: f'(s-) - f'(s+)
      T jump = ps[i].slope(ps[i].length()) - ps[i + 1].slope(T(0));
      if (jump != T(0)) mu.add_atom(PointT<T>::on_edge(e, ps[i].s1), jump);
    }
  }
  for (int v = 0; v < g.n_vertices(); ++v)
    if (at_vertex[v] != T(0)) mu.add_atom(PointT<T>::at_vertex(v), at_vertex[v]);
  return mu;
}

}  // namespace troplace
