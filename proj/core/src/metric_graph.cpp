#include "troplace/metric_graph.hpp"

#include <numeric>

#include "troplace/errors.hpp"

namespace troplace {

template <class T>
void MetricGraphT<T>::validate() const {
  graph.validate();
  if (static_cast<int>(length.size()) != graph.n_edges()) throw SchemaError("length vector size mismatch");
  for (const auto& l : length)
    if (!(l > T(0)) || !std::isfinite(to_double(l))) throw SchemaError("edge lengths must be positive and finite");
}

template struct MetricGraphT<double>;
template struct MetricGraphT<Rational>;

double inner(const MetricGraph& mg, const OneForm& a, const OneForm& b) {
  double s = 0;
  for (size_t e = 0; e < a.size(); ++e) s += mg.length[e] * a[e] * b[e];
  return s;
}

std::vector<double> boundary(const Graph& g, const OneForm& a) {
  std::vector<double> out(g.n_vertices(), 0.0);
  for (int e = 0; e < g.n_edges(); ++e) {
    out[g.edges[e].head] += a[e];
    out[g.edges[e].tail] -= a[e];
  }
  return out;
}

PeriodMatrix period_matrix(const MetricGraph& mg, const CycleBasis& basis) {
  const int h = basis.size(), n = mg.graph.n_edges();
  PeriodMatrix pm;
  pm.basis = basis;
  pm.P = Eigen::MatrixXd::Zero(h, n);
  for (int i = 0; i < h; ++i)
    for (int e = 0; e < n; ++e) pm.P(i, e) = mg.length[e] * basis.cycles[i][e];
  pm.M = Eigen::MatrixXd::Zero(h, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j)
      for (int e = 0; e < n; ++e) pm.M(i, j) += pm.P(i, e) * basis.cycles[j][e];
  if (h > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(pm.M);
    if (lu.rank() < h) throw NumericalError("degenerate cycle basis: singular period matrix");
  }
  return pm;
}

OneForm project_harmonic(const MetricGraph& mg, const OneForm& alpha, const CycleBasis& basis) {
  const PeriodMatrix pm = period_matrix(mg, basis);
  const int h = basis.size(), n = mg.graph.n_edges();
  OneForm out(n, 0.0);
  if (h == 0) return out;
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
  Eigen::VectorXd c = pm.M.ldlt().solve(pm.P * a);
  for (int i = 0; i < h; ++i)
    for (int e = 0; e < n; ++e) out[e] += c(i) * basis.cycles[i][e];
  return out;
}

OneForm project_harmonic(const MetricGraph& mg, const OneForm& alpha) {
  return project_harmonic(mg, alpha, cycle_basis(mg.graph));
}

namespace {

template <class T>
std::vector<T> foster_from_trees(const Graph& g, const std::vector<T>& len, int cap) {
  const TreeEnumeration te = spanning_trees(g, cap);
  const int n = g.n_edges();
  std::vector<T> num(n, T(0));
  T den(0);
  std::vector<char> in(n);
  for (const auto& t : te.trees) {
    std::fill(in.begin(), in.end(), 0);
    for (int e : t) in[e] = 1;
    T w(1);
    for (int e = 0; e < n; ++e)
      if (!in[e]) w *= len[e];
    den += w;
    for (int e = 0; e < n; ++e)
      if (!in[e]) num[e] += w;
  }
  for (auto& x : num) x /= den;
  return num;
}

}  // namespace

std::vector<double> foster_trees(const MetricGraph& mg, int cap) {
  // rescale to unit mean length; Foster coefficients are scale invariant
  const double mean = mg.total_length() / std::max(1, mg.graph.n_edges());
  std::vector<double> len = mg.length;
  for (auto& l : len) l /= mean;
  return foster_from_trees(mg.graph, len, cap);
}

std::vector<Rational> foster_trees_exact(const Graph& g, const std::vector<Rational>& length, int cap) {
  return foster_from_trees(g, length, cap);
}

std::vector<double> foster_matrix(const MetricGraph& mg, const CycleBasis& basis) {
  const int n = mg.graph.n_edges(), h = basis.size();
  std::vector<double> mu(n, 0.0);
  if (h == 0) return mu;
  const PeriodMatrix pm = period_matrix(mg, basis);
  const Eigen::MatrixXd Minv = pm.M.ldlt().solve(Eigen::MatrixXd::Identity(h, h));
  for (int e = 0; e < n; ++e) {
    double s = 0;
    for (int i = 0; i < h; ++i) {
      if (!basis.cycles[i][e]) continue;
      for (int j = 0; j < h; ++j) s += Minv(i, j) * basis.cycles[i][e] * basis.cycles[j][e];
    }
    mu[e] = mg.length[e] * s;
  }
  return mu;
}

std::vector<double> foster_matrix(const MetricGraph& mg) { return foster_matrix(mg, cycle_basis(mg.graph)); }

template <class T>
Mat<T> period_matrix_t(const Graph& g, const std::vector<T>& len, const CycleBasis& basis) {
  const int h = basis.size();
  Mat<T> M = zeros<T>(h, h);
  for (int e = 0; e < g.n_edges(); ++e)
    for (int i = 0; i < h; ++i) {
      if (!basis.cycles[i][e]) continue;
      for (int j = 0; j < h; ++j)
        if (basis.cycles[j][e]) M[i][j] += len[e] * T(basis.cycles[i][e] * basis.cycles[j][e]);
    }
  return M;
}

template <class T>
std::vector<T> foster(const MetricGraphT<T>& mg) {
  const CycleBasis basis = cycle_basis(mg.graph);
  const int n = mg.graph.n_edges(), h = basis.size();
  std::vector<T> mu(n, T(0));
  if (h == 0) return mu;
  const Mat<T> Minv = inverse(period_matrix_t(mg.graph, mg.length, basis));
  for (int e = 0; e < n; ++e) {
    T s(0);
    for (int i = 0; i < h; ++i) {
      if (!basis.cycles[i][e]) continue;
      for (int j = 0; j < h; ++j)
        if (basis.cycles[j][e]) s += Minv[i][j] * T(basis.cycles[i][e] * basis.cycles[j][e]);
    }
    mu[e] = mg.length[e] * s;
  }
  return mu;
}

template <class T>
MeasureT<T> zhang_measure(const MetricGraphT<T>& mg) {
  const auto mu = foster(mg);
  MeasureT<T> m(mg.graph.n_edges());
  for (int e = 0; e < mg.graph.n_edges(); ++e) m.density[e] = mu[e] / mg.length[e];
  for (int v = 0; v < mg.graph.n_vertices(); ++v)
    if (mg.graph.genus[v] != 0) m.add_atom(PointT<T>::at_vertex(v), T(mg.graph.genus[v]));
  return m;
}

template <class T>
MeasureT<T> canonical_measure(const MetricGraphT<T>& mg) {
  const int g = augmented_genus(mg.graph);
  if (g <= 0) throw InfeasibleError("canonical measure undefined in genus 0");
  MeasureT<T> m = zhang_measure(mg);
  m *= T(1) / T(g);
  return m;
}

#define TROPLACE_INSTANTIATE(T)                                                                  \
  template Mat<T> period_matrix_t<T>(const Graph&, const std::vector<T>&, const CycleBasis&);   \
  template std::vector<T> foster<T>(const MetricGraphT<T>&);                                     \
  template MeasureT<T> zhang_measure<T>(const MetricGraphT<T>&);                                 \
  template MeasureT<T> canonical_measure<T>(const MetricGraphT<T>&);
TROPLACE_INSTANTIATE(double)
TROPLACE_INSTANTIATE(Rational)
#undef TROPLACE_INSTANTIATE

}  // namespace troplace
