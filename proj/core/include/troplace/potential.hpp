#pragma once

#include <vector>

#include "troplace/measure.hpp"
#include "troplace/metric_graph.hpp"

namespace troplace {

// Default relative tolerance; TROPLACE_TOL overrides it.
double default_tolerance();

template <class T>
struct NormalizationT {
  enum Kind { Pin, Integral } kind = Pin;
  PointT<T> pin = PointT<T>::at_vertex(0);
  MeasureT<T> nu;  // used when kind == Integral

  static NormalizationT pinned(const PointT<T>& p) { return NormalizationT{Pin, p, {}}; }
  static NormalizationT integral(const MeasureT<T>& nu) { return NormalizationT{Integral, {}, nu}; }
};
using Normalization = NormalizationT<double>;

// Solve Δf = μ. Per connected component: μ must have mass zero; the pin (or
// ∫ f dν = 0 when ν charges the component) fixes the constant, other
// components are pinned to zero at their lowest vertex.
template <class T>
PWQT<T> solve_poisson(const MetricGraphT<T>& mg, const MeasureT<T>& mu, const NormalizationT<T>& norm);

// j_{p-q,x}(y)
template <class T>
T j_function(const MetricGraphT<T>& mg, const PointT<T>& p, const PointT<T>& q, const PointT<T>& x,
             const PointT<T>& y);

// g_μ(x, ·)
template <class T>
PWQT<T> green_function(const MetricGraphT<T>& mg, const MeasureT<T>& mu, const PointT<T>& x);
template <class T>
T green(const MetricGraphT<T>& mg, const MeasureT<T>& mu, const PointT<T>& x, const PointT<T>& y);

// ⟨D1, D2⟩ = Σ_x D2(x) f1(x) with Δ f1 = D1.
template <class T>
T height_pairing(const MetricGraphT<T>& mg, const DivisorT<T>& d1, const DivisorT<T>& d2);

// ∫ f1' f2' dλ
template <class T>
T dirichlet_pairing(const MetricGraphT<T>& mg, const PWQT<T>& f1, const PWQT<T>& f2);

// Dirichlet-integral route of the height pairing.
double height_pairing_dirichlet(const MetricGraph& mg, const Divisor& d1, const Divisor& d2);
// ‖α‖² - αᵀPᵀM⁻¹Pα route with ∂α = D; vertex-supported divisors only.
double height_pairing_hodge(const MetricGraph& mg, const Divisor& d1, const Divisor& d2);

double effective_resistance(const MetricGraph& mg, const Point& p, const Point& q);

// Max over points of the atom difference and over edges of density·ℓ difference.
double measure_distance(const MetricGraph& mg, const GraphMeasure& a, const GraphMeasure& b);

}  // namespace troplace
