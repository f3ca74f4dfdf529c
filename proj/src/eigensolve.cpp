#include "qslab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qslab {

void DecompositionQuality::merge(const DecompositionQuality& o) {
  max_residual = std::max(max_residual, o.max_residual);
  max_orthogonality = std::max(max_orthogonality, o.max_orthogonality);
}

DecompositionQuality check_decomposition(const Matrix& a, std::span<const double> energies,
                                         const Matrix& modes) {
  const std::size_t n = a.rows();
  DecompositionQuality q;
  double norm = 0.0;
  for (double e : energies) norm = std::max(norm, std::abs(e));
  if (norm == 0.0) norm = 1.0;
  std::vector<double> av(n);
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const auto v = modes.row(k);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = kernels::dot(a.row(i), v) - energies[k] * v[i];
      r2 += d * d;
    }
    q.max_residual = std::max(q.max_residual, std::sqrt(r2) / norm);
    for (std::size_t j = 0; j <= k; ++j) {
      const double g = kernels::dot(modes.row(j), v) - (j == k ? 1.0 : 0.0);
      q.max_orthogonality = std::max(q.max_orthogonality, std::abs(g));
    }
  }
  return q;
}

EigenDecomposition decompose(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ParameterError("decompose: matrix not square");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (a(i, j) != a(j, i)) throw ParameterError("decompose: matrix not symmetric");
    }
  }
  Tridiagonal t = householder_tridiagonalize(a);
  tridiagonal_ql<double>(t.diag, t.off, &t.reflectors_t);
  EigenDecomposition d;
  d.energies = std::move(t.diag);
  d.modes = std::move(t.reflectors_t);
  d.ground_offset = n > 0 ? d.energies.front() : 0.0;
  d.quality = check_decomposition(a, d.energies, d.modes);
  return d;
}

EigenDecomposition decompose(const HamiltonianMatrix& h) { return decompose(h.to_dense()); }

namespace {

// Real symmetric tridiagonal block with dense action, for residual checks.
DecompositionQuality check_tridiagonal(std::span<const double> diag, double off,
                                       std::span<const double> energies, const Matrix& v) {
  const std::size_t n = diag.size();
  DecompositionQuality q;
  double norm = 0.0;
  for (double e : energies) norm = std::max(norm, std::abs(e));
  if (norm == 0.0) norm = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto x = v.row(k);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y = diag[i] * x[i];
      if (i > 0) y += off * x[i - 1];
      if (i + 1 < n) y += off * x[i + 1];
      const double d = y - energies[k] * x[i];
      r2 += d * d;
    }
    q.max_residual = std::max(q.max_residual, std::sqrt(r2) / norm);
    for (std::size_t j = 0; j <= k; ++j) {
      const double g = kernels::dot(v.row(j), x) - (j == k ? 1.0 : 0.0);
      q.max_orthogonality = std::max(q.max_orthogonality, std::abs(g));
    }
  }
  return q;
}

}  // namespace

BlochSpectrum::BlochSpectrum(double depth, double offset, int sites, int points_per_site)
    : depth_(depth), offset_(offset), sites_(sites), points_(points_per_site) {
  if (!(depth >= 0.0)) throw ParameterError("bloch: depth must be >= 0");
  if (sites < 1 || points_per_site < 2 || points_per_site % 2 != 0) {
    throw ParameterError("bloch: need sites >= 1 and an even number of points per site");
  }
  const auto p = static_cast<std::size_t>(points_);
  energies_.resize(static_cast<std::size_t>(sites_) * p);
  vectors_.reserve(static_cast<std::size_t>(sites_));
  std::vector<double> diag(p), off(p), d0(p);
  for (int j = 0; j < sites_; ++j) {
    for (std::size_t e = 0; e < p; ++e) {
      const double l = static_cast<double>(e) - static_cast<double>(points_ / 2);
      const double k = 2.0 * kPi * (static_cast<double>(j) / sites_ + l);
      diag[e] = kKinetic * k * k - depth_ / 2.0;
      off[e] = -depth_ / 4.0;
    }
    d0 = diag;
    Matrix v = Matrix::identity(p);
    tridiagonal_ql<double>(diag, off, &v);
    quality_.merge(check_tridiagonal(d0, -depth_ / 4.0, diag, v));
    std::copy(diag.begin(), diag.end(), energies_.begin() + static_cast<std::ptrdiff_t>(j * p));
    vectors_.push_back(std::move(v));
  }
  ground_ = *std::min_element(energies_.begin(), energies_.end());
}

double BlochSpectrum::band_center(int band) const {
  if (band < 0 || band >= points_) throw ParameterError("bloch: band index out of range");
  double s = 0.0;
  for (int j = 0; j < sites_; ++j) s += energies_[static_cast<std::size_t>(j * points_ + band)];
  return s / sites_;
}

SingleSiteStates single_site_eigenstates(const LatticeParams& params, int count) {
  params.validate();
  const double depth = trap_depth(params.polarization_angle, params.depth_at_zero);
  const int p = params.points_per_site;
  if (count < 1 || count > p) throw ParameterError("single_site_eigenstates: count out of range");
  const BlochSpectrum spec(depth, 0.0, 1, p);

  SingleSiteStates out;
  out.bound_levels = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (spec.energy(k) < 0.0) ++out.bound_levels;
  }
  if (count > out.bound_levels) {
    throw ParameterError("single_site_eigenstates: " + std::to_string(count) + " levels requested, only " +
                         std::to_string(out.bound_levels) + " bound");
  }
  out.positions.resize(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) out.positions[static_cast<std::size_t>(r)] = static_cast<double>(r - p / 2) / p;
  out.values = Matrix(static_cast<std::size_t>(count), static_cast<std::size_t>(p));
  for (int n = 0; n < count; ++n) {
    const auto v = spec.vector(static_cast<std::size_t>(n));
    out.energies.push_back(spec.energy(static_cast<std::size_t>(n)));
    // sum_l v_l exp(2 pi i l u) / sqrt(P) is real (cosine sum) for even
    // parity and imaginary (sine sum) for odd parity; keep the nonvanishing
    // one. The unpaired Nyquist entry leaks a little into the other.
    std::vector<double> c_sum(static_cast<std::size_t>(p)), s_sum(static_cast<std::size_t>(p));
    double c2 = 0.0, s2 = 0.0;
    for (int r = 0; r < p; ++r) {
      double sc = 0.0, ss = 0.0;
      for (int e = 0; e < p; ++e) {
        const int l = e - p / 2;
        const long ph = (static_cast<long>(l) * (r - p / 2)) % p;
        const double arg = 2.0 * kPi * static_cast<double>(ph) / p;
        sc += v[static_cast<std::size_t>(e)] * std::cos(arg);
        ss += v[static_cast<std::size_t>(e)] * std::sin(arg);
      }
      c_sum[static_cast<std::size_t>(r)] = sc;
      s_sum[static_cast<std::size_t>(r)] = ss;
      c2 += sc * sc;
      s2 += ss * ss;
    }
    const auto& chosen = c2 >= s2 ? c_sum : s_sum;
    const double norm2 = std::max(c2, s2);
    std::copy(chosen.begin(), chosen.end(), out.values.row(static_cast<std::size_t>(n)).begin());
    const double inv = 1.0 / std::sqrt(norm2);
    double sign = 1.0;
    // Fix sign: positive at the centre for even n, positive slope for odd n.
    const auto c = static_cast<std::size_t>(p / 2);
    const double probe = (n % 2 == 0) ? out.values(static_cast<std::size_t>(n), c)
                                      : out.values(static_cast<std::size_t>(n), c + 1) -
                                            out.values(static_cast<std::size_t>(n), c - 1);
    if (probe < 0.0) sign = -1.0;
    for (auto& x : out.values.row(static_cast<std::size_t>(n))) x *= sign * inv;
  }
  return out;
}

std::vector<BandStructure> band_structure(double depth, int n_bands, int q_points, int cutoff) {
  if (!(depth >= 0.0)) throw ParameterError("band_structure: depth must be >= 0");
  if (n_bands < 1 || q_points < 2) throw ParameterError("band_structure: need n_bands >= 1 and q_points >= 2");
  if (cutoff < 1 || 2 * cutoff + 1 < n_bands) throw ParameterError("band_structure: plane-wave cutoff too small");
  using Real = long double;
  const std::size_t dim = static_cast<std::size_t>(2 * cutoff + 1);
  const Real pi = 3.141592653589793238462643383279502884L;
  const Real kappa = 1.0L / (pi * pi);

  std::vector<BandStructure> bands(static_cast<std::size_t>(n_bands));
  std::vector<std::vector<Real>> e_q(static_cast<std::size_t>(q_points));
  std::vector<double> qs(static_cast<std::size_t>(q_points));
  for (int iq = 0; iq < q_points; ++iq) {
    const Real q = -pi + 2.0L * pi * static_cast<Real>(iq + 1) / static_cast<Real>(q_points);
    qs[static_cast<std::size_t>(iq)] = static_cast<double>(q);
    std::vector<Real> diag(dim), off(dim, -static_cast<Real>(depth) / 4.0L);
    for (std::size_t e = 0; e < dim; ++e) {
      const Real k = q + 2.0L * pi * (static_cast<Real>(e) - static_cast<Real>(cutoff));
      diag[e] = kappa * k * k - static_cast<Real>(depth) / 2.0L;
    }
    tridiagonal_ql<Real>(diag, off, nullptr);
    e_q[static_cast<std::size_t>(iq)] = std::move(diag);
  }
  for (int b = 0; b < n_bands; ++b) {
    auto& out = bands[static_cast<std::size_t>(b)];
    out.band_index = b;
    out.quasimomentum = qs;
    Real lo = std::numeric_limits<Real>::max();
    Real hi = std::numeric_limits<Real>::lowest();
    for (int iq = 0; iq < q_points; ++iq) {
      const Real e = e_q[static_cast<std::size_t>(iq)][static_cast<std::size_t>(b)];
      out.energies.push_back(static_cast<double>(e));
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    out.bandwidth = static_cast<double>(hi - lo);
  }
  return bands;
}

std::vector<BandStructure> band_structure(const LatticeParams& params, int n_bands, int q_points) {
  params.validate();
  const double depth = trap_depth(params.polarization_angle, params.depth_at_zero);
  return band_structure(depth, n_bands, q_points, params.points_per_site / 2);
}

double tunneling_time(double bandwidth) {
  if (!(bandwidth > 0.0)) throw ParameterError("tunneling_time: bandwidth must be positive");
  return 2.0 * kPi / bandwidth;
}

}  // namespace qslab
