#pragma once

#include <Eigen/Dense>
#include <vector>

#include "troplace/graph.hpp"
#include "troplace/linalg.hpp"
#include "troplace/measure.hpp"
#include "troplace/rational.hpp"

namespace troplace {

template <class T>
struct MetricGraphT {
  Graph graph;
  std::vector<T> length;  // per edge, > 0

  T total_length() const {
    T s(0);
    for (const auto& l : length) s += l;
    return s;
  }
  // Σ ℓ(e) over the edges of the given level of pi.
  T layer_length(const OrderedPartition& pi, int level) const {
    T s(0);
    for (int e : pi.edges_at(level)) s += length.at(e);
    return s;
  }
  void validate() const;
};

using MetricGraph = MetricGraphT<double>;

template <class T, class S>
MetricGraphT<T> convert_metric(const MetricGraphT<S>& mg) {
  MetricGraphT<T> out{mg.graph, {}};
  for (const auto& l : mg.length) out.length.push_back(scalar_cast<T>(l));
  return out;
}

// Real one-form: value on each edge in its tail -> head orientation.
using OneForm = std::vector<double>;

// ⟨α, β⟩_ℓ = Σ ℓ(e) α(e) β(e)
double inner(const MetricGraph& mg, const OneForm& a, const OneForm& b);
// ∂α(v) = Σ_{head(e)=v} α(e) - Σ_{tail(e)=v} α(e)
std::vector<double> boundary(const Graph& g, const OneForm& a);

struct PeriodMatrix {
  Eigen::MatrixXd M;  // h x h
  Eigen::MatrixXd P;  // h x |E|, P(i,e) = ℓ(e) γ_i(e)
  CycleBasis basis;
};

PeriodMatrix period_matrix(const MetricGraph& mg, const CycleBasis& basis);

OneForm project_harmonic(const MetricGraph& mg, const OneForm& alpha, const CycleBasis& basis);
OneForm project_harmonic(const MetricGraph& mg, const OneForm& alpha);

// Foster coefficients by spanning-tree enumeration (weights Π_{e∉T} ℓ(e)).
std::vector<double> foster_trees(const MetricGraph& mg, int cap = 20);
std::vector<Rational> foster_trees_exact(const Graph& g, const std::vector<Rational>& length, int cap = 20);

// Foster coefficients μ(e) = ℓ(e) Σ_ij M⁻¹(i,j) γ_i(e) γ_j(e).
std::vector<double> foster_matrix(const MetricGraph& mg, const CycleBasis& basis);
std::vector<double> foster_matrix(const MetricGraph& mg);

// Period matrix over an arbitrary scalar (exact for rationals).
template <class T>
Mat<T> period_matrix_t(const Graph& g, const std::vector<T>& len, const CycleBasis& basis);

// Matrix route Foster coefficients over an arbitrary scalar.
template <class T>
std::vector<T> foster(const MetricGraphT<T>& mg);

// Σ_e μ(e)/ℓ(e) dλ_e + Σ_v 𝔤(v) δ_v (total mass g)
template <class T>
MeasureT<T> zhang_measure(const MetricGraphT<T>& mg);
// Zhang measure divided by the augmented genus.
template <class T>
MeasureT<T> canonical_measure(const MetricGraphT<T>& mg);

}  // namespace troplace
