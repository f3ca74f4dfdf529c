#include "qslab/linalg.hpp"

namespace qslab {

Tridiagonal householder_tridiagonalize(const Matrix& input) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw ParameterError("householder_tridiagonalize: matrix not square");
  Matrix a = input;
  Matrix w = Matrix::identity(n);
  std::vector<double> v, p;

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    v.assign(len, 0.0);
    double alpha2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      v[i] = a(k + 1 + i, k);
      alpha2 += v[i] * v[i];
    }
    const double alpha = std::sqrt(alpha2);
    if (alpha == 0.0) continue;
    const double sigma = v[0] >= 0.0 ? -alpha : alpha;
    v[0] -= sigma;
    const double vv = kernels::dot(v, v);
    if (vv == 0.0) continue;
    const double beta = 2.0 / vv;

    // Two-sided update of the trailing block: A22 -= v w^T + w v^T.
    p.assign(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      p[i] = beta * kernels::dot(a.row(k + 1 + i).subspan(k + 1), v);
    }
    const double half = 0.5 * beta * kernels::dot(p, v);
    for (std::size_t i = 0; i < len; ++i) p[i] -= half * v[i];
    for (std::size_t i = 0; i < len; ++i) {
      auto r = a.row(k + 1 + i).subspan(k + 1);
      kernels::axpy(-v[i], p, r);
      kernels::axpy(-p[i], v, r);
    }
    a(k + 1, k) = a(k, k + 1) = sigma;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = a(k, i) = 0.0;

    // W <- H W restricted to rows k+1..n-1.
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < len; ++i) kernels::axpy(v[i], w.row(k + 1 + i), r);
    for (std::size_t i = 0; i < len; ++i) kernels::axpy(-beta * v[i], r, w.row(k + 1 + i));
  }

  Tridiagonal t;
  t.diag.resize(n);
  t.off.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    t.diag[i] = a(i, i);
    if (i + 1 < n) t.off[i] = 0.5 * (a(i + 1, i) + a(i, i + 1));
  }
  t.reflectors_t = std::move(w);
  return t;
}

LeastSquares least_squares(const Matrix& design, std::span<const double> y) {
  const std::size_t m = design.rows();
  const std::size_t p = design.cols();
  if (y.size() != m) throw ParameterError("least_squares: observation count mismatch");
  if (m < p || p == 0) throw ParameterError("least_squares: fewer observations than parameters");

  // Column-major working copy, each column scaled to unit norm.
  std::vector<std::vector<double>> col(p, std::vector<double>(m));
  std::vector<double> scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      col[j][i] = design(i, j);
      s += design(i, j) * design(i, j);
    }
    s = std::sqrt(s);
    if (s == 0.0) throw ParameterError("least_squares: degenerate design (zero column)");
    scale[j] = s;
    for (auto& x : col[j]) x /= s;
  }
  std::vector<double> b(y.begin(), y.end());

  Matrix r(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    auto& cj = col[j];
    double norm2 = 0.0;
    for (std::size_t i = j; i < m; ++i) norm2 += cj[i] * cj[i];
    const double norm = std::sqrt(norm2);
    if (norm <= 1e-10) throw ParameterError("least_squares: degenerate design matrix");
    const double alpha = cj[j] >= 0.0 ? -norm : norm;
    std::vector<double> v(cj.begin() + static_cast<std::ptrdiff_t>(j), cj.end());
    v[0] -= alpha;
    const double vv = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
    auto reflect = [&](std::vector<double>& x) {
      double d = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * x[j + i];
      d *= 2.0 / vv;
      for (std::size_t i = 0; i < v.size(); ++i) x[j + i] -= d * v[i];
    };
    for (std::size_t k = j; k < p; ++k) reflect(col[k]);
    reflect(b);
    for (std::size_t k = j; k < p; ++k) r(j, k) = col[k][j];
  }

  // Back substitution and R^-1.
  std::vector<double> beta(p, 0.0);
  for (std::size_t jj = p; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t k = jj + 1; k < p; ++k) s -= r(jj, k) * beta[k];
    beta[jj] = s / r(jj, jj);
  }
  Matrix rinv(p, p);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t jj = c + 1; jj-- > 0;) {
      double s = jj == c ? 1.0 : 0.0;
      for (std::size_t k = jj + 1; k <= c; ++k) s -= r(jj, k) * rinv(k, c);
      rinv(jj, c) = s / r(jj, jj);
    }
  }

  LeastSquares out;
  out.dof = m - p;
  out.rss = 0.0;
  for (std::size_t i = p; i < m; ++i) out.rss += b[i] * b[i];
  const double sigma2 = out.dof > 0 ? out.rss / static_cast<double>(out.dof) : 0.0;
  out.coefficients.resize(p);
  out.covariance = Matrix(p, p);
  for (std::size_t j = 0; j < p; ++j) out.coefficients[j] = beta[j] / scale[j];
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t c = 0; c < p; ++c) {
      double s = 0.0;
      for (std::size_t k = std::max(a, c); k < p; ++k) s += rinv(a, k) * rinv(c, k);
      out.covariance(a, c) = sigma2 * s / (scale[a] * scale[c]);
    }
  }
  return out;
}

}  // namespace qslab
