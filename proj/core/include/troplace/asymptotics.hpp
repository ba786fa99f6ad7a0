#pragma once

#include <limits>
#include <string>
#include <vector>

#include "troplace/measure.hpp"
#include "troplace/metric_graph.hpp"
#include "troplace/tropical.hpp"

namespace troplace {

// L_j(s) = s^{β_j}, with β_1 > ... > β_r > 0 and β_j > 2 β_{j+1}.
struct DegenerationSchedule {
  std::vector<double> beta;

  static DegenerationSchedule standard(int rank);  // β_j = 3^{r-j}
  int rank() const { return static_cast<int>(beta.size()); }
  void validate() const;  // throws SchemaError
  bool integral() const;

  // Layer scales L_1..L_r at s. Rational mode needs integer exponents.
  template <class T>
  std::vector<T> scales(const T& s) const;

  // Exponent of max_j L_{j+1}²/L_j, with L_f = 1 when the finitary part is
  // nonempty and absent otherwise. NaN when no term exists.
  double poisson_exponent(bool has_finite) const;
  // Exponent of max_{k<=n} L_{k+1}/L_k.
  double block_exponent(int n, bool has_finite) const;
};

// ℓ(e) = L_j(s) l(e) on π_j, ℓ(e) = l(e) on π_f.
template <class T>
MetricGraphT<T> degenerate(const TropicalCurveT<T>& tc, const DegenerationSchedule& sched, const T& s);

// Layer lengths of mg: (L_1, ..., L_r, L_f) with L_f = 1.
template <class T>
std::vector<T> layer_scales(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg);

// pr_π(mg): the tropical curve with layerwise normalized lengths of mg.
template <class T>
TropicalCurveT<T> project_to_stratum(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg);

// Homothety between Γ and mg, edge by edge.
template <class T>
PointT<T> to_metric_point(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const PointT<T>& x);
template <class T>
PointT<T> to_curve_point(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const PointT<T>& y);
// Measure on mg carried to Γ with edge masses preserved.
template <class T>
MeasureT<T> transport_measure(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const MeasureT<T>& mu);

// F* = Σ_j L_j f_j* + f_f* as a function on mg.
template <class T>
PWQT<T> pullback(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, const MetricGraphT<T>& mg);

// All vertices plus `per_edge` interior points on every edge.
template <class T>
std::vector<PointT<T>> sample_points(const Graph& g, const std::vector<T>& len, int per_edge = 32);

// sup_x |f_mg(x) - F*(x)| for Δf = D pinned at the vertex `pin`. D lives on Γ.
template <class T>
double expansion_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const DivisorT<T>& d, int pin,
                       int per_edge = 32);
// Same quantity assembled from j-functions j_{p - x0, x0}.
template <class T>
double expansion_error_j_route(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const DivisorT<T>& d,
                               int pin, int per_edge = 32);

struct GreenExpansion {
  double absolute = 0;
  double relative = 0;  // absolute / sup |g_mg|
};
// Canonical measure of mg against the Green function of its push-out; poles at
// vertices and edge midpoints.
template <class T>
GreenExpansion green_expansion_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, int per_edge = 32);

// |⟨D1,D2⟩_mg - Σ L_k ⟨D1,D2⟩_k| / |⟨D1,D2⟩_mg|
template <class T>
double height_expansion_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, const DivisorT<T>& d1,
                              const DivisorT<T>& d2);

struct BlockError {
  int m = 0, n = 0;
  double vs_sum_ap = 0;  // against Σ_p A_p(mg)
  double vs_limit = 0;   // L_m (M_ℓ⁻¹)_{mn} against B_{mn}
};
// Every nonempty block pair m <= n of the admissible basis.
template <class T>
std::vector<BlockError> inverse_period_blocks(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg);
// A_p(mg): minor period matrices under ℓ with full blocks of M_ℓ between them.
template <class T>
Mat<T> ap_matrix_metric(const CycleBasis& basis, const std::vector<int>& level, const std::vector<T>& ell,
                        const std::vector<int>& path);

// ∫_Γ h d𝚫F for h a function on Γ, paired edge by edge within each layer.
template <class T>
T tropical_laplacian_pairing(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, const PWQT<T>& h);
// |∫_mg h Δ(F*) - ∫_Γ h d𝚫F|, h read on mg through the homothety.
template <class T>
double weak_laplacian_gap(const TropicalCurveT<T>& tc, const TropicalFunctionT<T>& F, const PWQT<T>& h,
                          const MetricGraphT<T>& mg);

// Rank one only. Q(e) = (Σ_{𝒯_1, e∉T} ω - μ_𝒞(e) Σ_{𝒯_1} ω) / Σ_{𝒯_π} ω.
template <class T>
std::vector<T> foster_first_order(const TropicalCurveT<T>& tc);
// Tropical Foster coefficients: minor coefficients edge by edge.
template <class T>
std::vector<T> tropical_foster(const TropicalCurveT<T>& tc);
// max_e |L_1 (μ_mg(e) - μ_𝒞(e)) - Q(e)| / max_e |Q(e)|
template <class T>
double foster_law_error(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg);

// Mass-zero measure Σ_{T∈𝒯_1} μ_T on Γ (rank one).
template <class T>
MeasureT<T> canonical_defect_measure(const TropicalCurveT<T>& tc);

struct CorrectionResidual {
  double plain = 0;      // sup |g_{ℓ,1} - g_{𝒞,1}|
  double corrected = 0;  // after subtracting the first-order term
};
// Lebesgue measure λ/L(mg) against (λ_{Γ¹}, 0, ...).
template <class T>
CorrectionResidual lebesgue_correction(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, int per_edge = 8);
// Canonical measures, rank one.
template <class T>
CorrectionResidual canonical_correction(const TropicalCurveT<T>& tc, const MetricGraphT<T>& mg, int per_edge = 8);

struct RateFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};
// OLS of log err on log s over the last `last` points with positive error.
RateFit fit_rate(const std::vector<double>& s, const std::vector<double>& err, int last = 3);

enum class Experiment { Poisson, Green, Period, Height, Foster, Lebesgue, Canonical };
Experiment parse_experiment(const std::string& name);  // throws SchemaError
std::string experiment_name(Experiment e);

struct SweepConfig {
  Experiment experiment = Experiment::Poisson;
  DegenerationSchedule schedule;
  std::vector<double> s_grid{10, 100, 1000, 10000};
  bool exact = true;
  Divisor d1, d2;  // default: first vertex minus last vertex
  int pin = 0;
  int per_edge = 32;
  bool parallel = true;
};

struct SweepResult {
  std::vector<std::string> metrics;    // error column names
  std::vector<double> s;
  std::vector<std::vector<double>> L;  // per row, L_1..L_r
  std::vector<std::vector<double>> values;  // per row, one per metric
  std::vector<RateFit> fits;                // per metric
  std::vector<double> predicted;            // per metric, NaN when none
};

// tc carries the unnormalized input lengths; they are normalized per layer.
SweepResult run_sweep(const Graph& g, const OrderedPartition& pi, const std::vector<double>& length,
                      const SweepConfig& cfg);

}  // namespace troplace
