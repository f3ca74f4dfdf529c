#pragma once

// Dense real matrices, Householder tridiagonalization, implicit-shift QL for
// symmetric tridiagonal matrices, and a small least-squares solver.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "qslab/error.hpp"
#include "qslab/kernels.hpp"

namespace qslab {

template <typename Real>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Real operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<Real> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const Real> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const Real> data() const { return data_; }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_,
                     data_.begin() + b * cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

using Matrix = BasicMatrix<double>;

namespace detail {

template <typename Real>
void rotate_rows(Real c, Real s, std::span<Real> x, std::span<Real> y) {
  if constexpr (std::is_same_v<Real, double>) {
    kernels::rotate(c, s, x, y);
  } else {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const Real xk = x[k];
      const Real yk = y[k];
      x[k] = c * xk + s * yk;
      y[k] = c * yk - s * xk;
    }
  }
}

}  // namespace detail

// Implicit-shift QL on a symmetric tridiagonal matrix.
//
// diag[i] = T(i,i), off[i] = T(i,i+1) (off[n-1] ignored). On return diag holds
// the eigenvalues in ascending order. If vectors is non-null its rows are
// rotated along (start from identity to get eigenvectors of T, or from Q^T of
// a Householder reduction), and row k ends up as the eigenvector of diag[k],
// signed so that its largest-magnitude component is positive.
// The total number of QL iterations is capped at 64 n.
template <std::floating_point Real>
void tridiagonal_ql(std::span<Real> diag, std::span<Real> off, BasicMatrix<Real>* vectors) {
  const std::size_t n = diag.size();
  if (off.size() < n) throw ParameterError("tridiagonal_ql: off-diagonal too short");
  if (vectors && vectors->rows() != n) throw ParameterError("tridiagonal_ql: vector block size");
  if (n == 0) return;
  off[n - 1] = Real(0);
  const Real eps = std::numeric_limits<Real>::epsilon();
  const std::size_t cap = 64 * n;
  std::size_t iterations = 0;

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t m;
    for (;;) {
      for (m = l; m + 1 < n; ++m) {
        const Real dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
        if (std::abs(off[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iterations > cap) {
        Real worst = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) worst = std::max(worst, std::abs(off[i]));
        throw NumericError("tridiagonal_ql: no convergence after " + std::to_string(cap) +
                               " iterations",
                           static_cast<double>(worst));
      }
      Real g = (diag[l + 1] - diag[l]) / (Real(2) * off[l]);
      Real r = std::hypot(g, Real(1));
      g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
      Real s = 1, c = 1, p = 0;
      bool underflow = false;
      for (std::size_t ii = m; ii-- > l;) {
        const Real f = s * off[ii];
        const Real b = c * off[ii];
        r = std::hypot(f, g);
        off[ii + 1] = r;
        if (r == Real(0)) {
          diag[ii + 1] -= p;
          off[m] = 0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = diag[ii + 1] - p;
        r = (diag[ii] - g) * s + Real(2) * c * b;
        p = s * r;
        diag[ii + 1] = g + p;
        g = c * r - b;
        if (vectors) detail::rotate_rows(c, s, vectors->row(ii + 1), vectors->row(ii));
      }
      if (underflow) continue;
      diag[l] -= p;
      off[l] = g;
      off[m] = 0;
    }
  }

  // Ascending order (selection sort keeps the permutation deterministic).
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t k = i;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (diag[j] < diag[k]) k = j;
    }
    if (k != i) {
      std::swap(diag[i], diag[k]);
      if (vectors) vectors->swap_rows(i, k);
    }
  }
  if (vectors) {
    for (std::size_t i = 0; i < n; ++i) {
      auto v = vectors->row(i);
      std::size_t big = 0;
      for (std::size_t k = 1; k < v.size(); ++k) {
        if (std::abs(v[k]) > std::abs(v[big])) big = k;
      }
      if (v[big] < Real(0)) {
        for (auto& x : v) x = -x;
      }
    }
  }
}

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;
  Matrix reflectors_t;  // Q^T with A = Q T Q^T
};

// Householder reduction of a dense symmetric matrix.
Tridiagonal householder_tridiagonalize(const Matrix& a);

struct LeastSquares {
  std::vector<double> coefficients;
  Matrix covariance;  // sigma^2 (X^T X)^-1 with sigma^2 = rss / dof
  double rss = 0.0;
  std::size_t dof = 0;

  double error(std::size_t i) const { return std::sqrt(covariance(i, i)); }
};

// Minimizes |X beta - y|_2 by Householder QR with column equilibration.
// Rank-deficient designs raise ParameterError.
LeastSquares least_squares(const Matrix& design, std::span<const double> y);

}  // namespace qslab
