#pragma once

#include <vector>

#include "troplace/graph.hpp"
#include "troplace/linalg.hpp"
#include "troplace/measure.hpp"
#include "troplace/metric_graph.hpp"
#include "troplace/potential.hpp"

namespace troplace {

// Graph + ordered partition + lengths, each infinitary layer of total length 1.
// Levels run 1..r for the layers and r+1 for the finitary part.
template <class T>
struct TropicalCurveT {
  Graph graph;
  OrderedPartition partition;
  std::vector<T> length;
  GradedMinorSet minors;
  CycleBasis basis;          // admissible for the partition
  std::vector<int> level;    // per edge

  // normalize = false requires the layer sums to be 1 already.
  static TropicalCurveT make(Graph g, OrderedPartition pi, std::vector<T> len, bool normalize = true);

  int rank() const { return partition.rank(); }
  int levels() const { return rank() + 1; }
  const Minor& minor(int k) const { return minors.level(k); }
  MetricGraphT<T> minor_metric(int k) const;
  MetricGraphT<T> representative() const { return MetricGraphT<T>{graph, length}; }
};
using TropicalCurve = TropicalCurveT<double>;

// (μ_1, ..., μ_r, μ_f); parts[k-1] lives on the minor of level k.
template <class T>
struct LayeredMeasureT {
  std::vector<MeasureT<T>> parts;
};
using LayeredMeasure = LayeredMeasureT<double>;

// (f_1, ..., f_r, f_f); parts[k-1] is a function on the minor of level k.
template <class T>
struct TropicalFunctionT {
  std::vector<PWQT<T>> parts;
};
using TropicalFunction = TropicalFunctionT<double>;

// Image of a point of Γ in the minor of level k (nullopt-like: vertex -1 when
// the point lies in the interior of a lower-level edge).
template <class T>
PointT<T> minor_point(const TropicalCurveT<T>& tc, int k, const PointT<T>& x);

// Restriction/push-out of a measure on Γ to a layered measure.
template <class T>
LayeredMeasureT<T> pushout(const TropicalCurveT<T>& tc, const MeasureT<T>& mu);
// Inverse of pushout: vertex part of μ_f plus the interiors of each layer.
template <class T>
MeasureT<T> flatten(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu);

// mass(H) = μ_k(H) - μ_{k-1}({x_H}) per component H of each minor.
template <class T>
std::vector<std::vector<T>> mass_function(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu);
template <class T>
bool has_mass_zero(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, double tol);
template <class T>
bool has_mass_one(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, double tol);

// f_k seen on Γ: minor values on π_k, constant on higher levels, affine on lower.
template <class T>
PWQT<T> extend(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk);
template <class T>
T evaluate_extended(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk, const PointT<T>& x);
template <class T>
T integrate_extended(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk, const MeasureT<T>& nu);

// div_{i→k} f_i = -Σ_{e∈π_i} Σ_{v∈e} sl_e f_i(v) δ_{κ_k(v)}
template <class T>
MeasureT<T> div_transfer(const TropicalCurveT<T>& tc, int i, int k, const PWQT<T>& fi);

template <class T>
LayeredMeasureT<T> tropical_laplacian(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F);

struct ArrangementReport {
  bool arranged = true;
  double residual = 0;  // max vertexwise slope sum
};
// Lower harmonicity of f_k on every layer i < k.
template <class T>
double lower_harmonic_residual(const TropicalCurveT<T>& tc, int k, const PWQT<T>& fk);
template <class T>
ArrangementReport is_harmonically_arranged(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F,
                                           double tol = 1e-9);

template <class T>
struct RearrangementT {
  TropicalFunctionT<T> f;
  std::vector<std::vector<T>> constants;  // per level, per minor component
};
// Least-norm per-component constants making every f_k lower harmonic.
template <class T>
RearrangementT<T> harmonic_rearrange(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F);

// Blocks of the admissible basis under lengths len (per edge): M_i and T_ik.
template <class T>
Mat<T> period_block(const CycleBasis& basis, const std::vector<int>& level, const std::vector<T>& len, int i,
                    int k);
// A_p = (-1)^{|p|} M_{i0}^{-1} T_{i0 i1} M_{i1}^{-1} ... M_{is}^{-1}
template <class T>
Mat<T> ap_matrix(const CycleBasis& basis, const std::vector<int>& level, const std::vector<T>& len,
                 const std::vector<int>& path);
// All strictly increasing sequences from i to k through levels with nonempty blocks.
std::vector<std::vector<int>> increasing_paths(const CycleBasis& basis, int i, int k);

// Unique exact extension of an exact form on the minor of level j (values in
// minor edge order); harmonic on lower layers, zero on higher ones.
template <class T>
std::vector<T> extend_exact_form(const TropicalCurveT<T>& tc, int j, const std::vector<T>& alpha);
// Same extension through the explicit A_p sum-product expression.
template <class T>
std::vector<T> extend_exact_form_sum_product(const TropicalCurveT<T>& tc, int j, const std::vector<T>& alpha);

// 𝚫F = μ, F harmonically arranged, ∫_Γ f_k dν = 0 for each k. ν is a measure on Γ
// of total mass 1.
template <class T>
TropicalFunctionT<T> solve_tropical_poisson(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu,
                                            const MeasureT<T>& nu);
template <class T>
TropicalFunctionT<T> solve_tropical_poisson(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu,
                                            const LayeredMeasureT<T>& nu);

template <class T>
TropicalFunctionT<T> tropical_j(const TropicalCurveT<T>& tc, const PointT<T>& p, const PointT<T>& q,
                                const PointT<T>& x);
// Green function of a mass-one layered measure with pole x.
template <class T>
TropicalFunctionT<T> tropical_green(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, const PointT<T>& x);
// Values (g_1(x,y), ..., g_f(x,y)) after extension to Γ.
template <class T>
std::vector<T> tropical_green_values(const TropicalCurveT<T>& tc, const LayeredMeasureT<T>& mu, const PointT<T>& x,
                                     const PointT<T>& y);

// Induced divisors D^k = Δ_k f_k of the cascade, one measure per level.
template <class T>
std::vector<MeasureT<T>> induced_divisors(const TropicalCurveT<T>& tc, const DivisorT<T>& d);
template <class T>
std::vector<T> tropical_height(const TropicalCurveT<T>& tc, const DivisorT<T>& d1, const DivisorT<T>& d2);

// Pushout of (1/g)(Σ_e μ_{Γ^{lv(e)}}(e)/l(e) dλ_e + Σ_v 𝔤(v) δ_v).
template <class T>
MeasureT<T> canonical_measure_flat(const TropicalCurveT<T>& tc);
template <class T>
LayeredMeasureT<T> canonical_measure_tropical(const TropicalCurveT<T>& tc);

}  // namespace troplace
