#pragma once

#include <vector>

#include "troplace/graph.hpp"

namespace troplace {

// Φ_j(t) = t^{base^{j-1}}. base > 2 keeps the family log-increasing with
// parameter 2 and Φ_j²/Φ_{j+1} → 0.
struct AuxiliaryFamily {
  double base = 3;

  void validate() const;  // throws SchemaError
  double exponent(int j) const;
  double phi(int j, double t) const;
  // ln(Φ_{lo+1}(t) + ... + Φ_hi(t)) at t = e^u, without overflow.
  double log_sum(int lo, int hi, double u) const;
};

struct LogMapConfig {
  AuxiliaryFamily family;
  double tight_tol = 1e-9;       // relative, on the Rado constraints
  double bisection_tol = 1e-12;  // relative, on t
  int max_iterations = 200;
};

// A point of the compactified cone: projective coordinates on each layer of
// the partition plus ordinary coordinates on the finitary part. Coordinates
// outside the partition are zero.
template <class T>
struct StratumPointT {
  OrderedPartition partition;
  std::vector<std::vector<T>> layers;  // one simplex point per layer
  std::vector<T> finite;               // aligned with partition.finite
  bool ambiguous = false;              // a cut was dropped within tolerance

  bool at_infinity() const { return partition.rank() > 0; }
};
using StratumPoint = StratumPointT<double>;

// Vertex-curve point γ_φ(t): coordinate order[l] gets Φ_{m-l}(t), m = order.size().
std::vector<double> vertex_curve(const std::vector<int>& order, const AuxiliaryFamily& fam, double t);

// Rado description of P_t in dimension M >= x.size(): the k largest
// coordinates sum to at most Φ_M(t) + ... + Φ_{M-k+1}(t).
bool in_exhaustion(const std::vector<double>& x, const AuxiliaryFamily& fam, double t, int M = -1);

// Smallest t with x ∈ P_t. Throws DomainError inside the closed unit cube.
double exhaustion_parameter(const std::vector<double>& x, const LogMapConfig& cfg = {}, int M = -1);

// Face of ∂_∞P_{t*} carrying x: tight nested constraints give the layers,
// zero coordinates are deleted, the rest is finitary.
OrderedPartition boundary_partition(const std::vector<double>& x, const LogMapConfig& cfg = {}, int M = -1,
                                    bool* ambiguous = nullptr);

// ι_t(s) = (1 + (s-1)/(t-s)) s; ι_∞ is the identity.
double iota(double t, double s);

// The unfolding homeomorphisms. simplex_unfold acts on Q_t built from
// Φ_{lo+1}, ..., Φ_{lo+n} and needs y off ∂_∞Q_t; cone_unfold acts on P_t in
// dimension M and needs x off ∂_∞P_t.
std::vector<double> simplex_unfold(const std::vector<double>& y, int lo, double t, const LogMapConfig& cfg = {});
std::vector<double> cone_unfold(const std::vector<double>& x, int M, double t, const LogMapConfig& cfg = {});

// Log^trop(x) = h_{t*}(x) for x outside the unit cube.
StratumPoint log_trop(const std::vector<double>& x, const LogMapConfig& cfg = {}, int M = -1);
// Identity on boundary strata; finite points go through the map above.
StratumPoint log_trop(const StratumPoint& p, const LogMapConfig& cfg = {});

// Stratumwise projection: layer coordinates divided by the layer sum,
// finitary ones passed through. Throws DomainError on a zero layer sum.
template <class T>
StratumPointT<T> pr_pi(const std::vector<T>& x, const OrderedPartition& pi);

}  // namespace troplace
