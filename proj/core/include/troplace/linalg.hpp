#pragma once

#include <Eigen/Dense>
#include <vector>

#include "troplace/errors.hpp"
#include "troplace/rational.hpp"

namespace troplace {

template <class T>
using Mat = std::vector<std::vector<T>>;

template <class T>
Mat<T> zeros(int r, int c) {
  return Mat<T>(r, std::vector<T>(c, T(0)));
}

// Square solve; exact elimination for rationals, pivoted LU for doubles.
template <class T>
std::vector<T> solve_square(Mat<T> a, std::vector<T> b) {
  const int n = static_cast<int>(a.size());
  if constexpr (scalar_traits<T>::exact) {
    auto x = solve_exact(std::move(a), std::move(b));
    if (!x) throw NumericalError("singular linear system");
    return *x;
  } else {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd B(n);
    for (int i = 0; i < n; ++i) {
      B(i) = b[i];
      for (int j = 0; j < n; ++j) A(i, j) = a[i][j];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (n > 0 && lu.rank() < n) throw NumericalError("singular linear system");
    Eigen::VectorXd X = lu.solve(B);
    return std::vector<T>(X.data(), X.data() + n);
  }
}

// Symmetric positive definite solve (LDLT for doubles).
template <class T>
std::vector<T> solve_spd(Mat<T> a, std::vector<T> b) {
  if constexpr (scalar_traits<T>::exact) {
    return solve_square(std::move(a), std::move(b));
  } else {
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd B(n);
    for (int i = 0; i < n; ++i) {
      B(i) = b[i];
      for (int j = 0; j < n; ++j) A(i, j) = a[i][j];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw NumericalError("LDLT factorization failed");
    Eigen::VectorXd X = ldlt.solve(B);
    return std::vector<T>(X.data(), X.data() + n);
  }
}

template <class T>
Mat<T> inverse(const Mat<T>& a) {
  const int n = static_cast<int>(a.size());
  Mat<T> inv = zeros<T>(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<T> e(n, T(0));
    e[j] = T(1);
    auto col = solve_square(a, e);
    for (int i = 0; i < n; ++i) inv[i][j] = col[i];
  }
  return inv;
}

template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  const int n = static_cast<int>(a.size());
  const int k = n ? static_cast<int>(a[0].size()) : 0;
  const int m = b.empty() ? 0 : static_cast<int>(b[0].size());
  Mat<T> c = zeros<T>(n, m);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < k; ++l) {
      if (a[i][l] == T(0)) continue;
      for (int j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
    }
  return c;
}

template <class T>
std::vector<T> matvec(const Mat<T>& a, const std::vector<T>& x) {
  std::vector<T> y(a.size(), T(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

template <class T>
Mat<T> transpose(const Mat<T>& a) {
  const int n = static_cast<int>(a.size());
  const int m = n ? static_cast<int>(a[0].size()) : 0;
  Mat<T> t = zeros<T>(m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) t[j][i] = a[i][j];
  return t;
}

template <class T>
struct ConsistentSolution {
  std::vector<T> x;             // least-norm solution
  std::vector<std::vector<T>> kernel;
  double residual = 0;          // max |A x - b|
};

// Solve a possibly over/under-determined consistent system by reduced row
// echelon form; returns the least-norm solution and a kernel basis.
template <class T>
ConsistentSolution<T> solve_consistent(Mat<T> a, std::vector<T> b, double tol = 1e-12) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  const Mat<T> a0 = a;
  const std::vector<T> b0 = b;
  double scale = 0;
  for (const auto& r : a)
    for (const auto& v : r) scale = std::max(scale, abs_d(v));
  const double ptol = tol * (scale > 0 ? scale : 1.0);
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int p = -1;
    double best = -1;
    for (int i = r; i < rows; ++i) {
      if (is_zero(a[i][c], ptol)) continue;
      double v = abs_d(a[i][c]);
      if (scalar_traits<T>::exact) {
        p = i;
        break;
      }
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p < 0) continue;
    std::swap(a[p], a[r]);
    std::swap(b[p], b[r]);
    const T piv = a[r][c];
    for (int j = c; j < cols; ++j) a[r][j] /= piv;
    b[r] /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == T(0)) continue;
      const T f = a[i][c];
      for (int j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  ConsistentSolution<T> out;
  std::vector<T> x(cols, T(0));
  for (int i = 0; i < r; ++i) x[pivot_col[i]] = b[i];
  std::vector<char> is_pivot(cols, 0);
  for (int c : pivot_col) is_pivot[c] = 1;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<T> k(cols, T(0));
    k[f] = T(1);
    for (int i = 0; i < r; ++i) k[pivot_col[i]] = -a[i][f];
    out.kernel.push_back(std::move(k));
  }
  // least norm: remove the kernel component
  if (!out.kernel.empty()) {
    const int d = static_cast<int>(out.kernel.size());
    Mat<T> G = zeros<T>(d, d);
    std::vector<T> rhs(d, T(0));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j)
        for (int c = 0; c < cols; ++c) G[i][j] += out.kernel[i][c] * out.kernel[j][c];
      for (int c = 0; c < cols; ++c) rhs[i] += out.kernel[i][c] * x[c];
    }
    auto w = solve_square(G, rhs);
    for (int i = 0; i < d; ++i)
      for (int c = 0; c < cols; ++c) x[c] -= w[i] * out.kernel[i][c];
  }
  for (int i = 0; i < rows; ++i) {
    T s(0);
    for (int c = 0; c < cols; ++c) s += a0[i][c] * x[c];
    out.residual = std::max(out.residual, abs_d(T(s - b0[i])));
  }
  out.x = std::move(x);
  return out;
}

}  // namespace troplace
