#include "qslab/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "qslab/error.hpp"
#include "qslab/fourier.hpp"
#include "qslab/kernels.hpp"

namespace qslab {

double QuantumState::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

cplx QuantumState::inner(const QuantumState& other) const {
  if (other.amplitudes.size() != amplitudes.size()) throw ParameterError("inner: grid mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) s += std::conj(amplitudes[i]) * other.amplitudes[i];
  return s;
}

double QuantumState::site_probability(int site) const {
  const auto p = static_cast<std::size_t>(grid.points_per_site());
  double s = 0.0;
  for (std::size_t i = 0; i < p; ++i) s += std::norm(amplitudes[static_cast<std::size_t>(site) * p + i]);
  return s;
}

double QuantumState::edge_probability(int sites) const {
  double s = 0.0;
  for (int k = 0; k < sites; ++k) {
    s += site_probability(k);
    s += site_probability(grid.sites() - 1 - k);
  }
  return s;
}

namespace {

double hermite(int n, double x) {
  switch (n) {
    case 0: return 1.0;
    case 1: return 2.0 * x;
    case 2: return 4.0 * x * x - 2.0;
    default: throw ParameterError("hermite: order > 2 not needed");
  }
}

void normalize(std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  const double inv = 1.0 / std::sqrt(s);
  for (auto& a : v) a *= inv;
}

void check_spectrum(const Grid& grid, const BlochSpectrum& spec) {
  if (spec.sites() != grid.sites() || spec.points_per_site() != grid.points_per_site()) {
    throw ParameterError("spectrum and grid sizes differ");
  }
}

// Gauge-basis coefficient index e of Fourier mode m in block j.
cplx gauge(double offset, int l) { return std::polar(1.0, -2.0 * kPi * offset * l); }

}  // namespace

PreparedState prepare_initial(int n, double dx, const LatticeModel& model, const BlochSpectrum& down,
                              InitialShape shape) {
  if (n < 0 || n > 2) throw ParameterError("prepare_initial: n must be 0, 1 or 2");
  if (!(dx >= 0.0 && dx <= 0.5)) throw ParameterError("prepare_initial: dx outside [0, 0.5]");
  const Grid& grid = model.grid;
  check_spectrum(grid, down);
  const std::size_t nn = grid.size();
  const int s = grid.sites();
  const int p = grid.points_per_site();
  const double centre = grid.home_site();
  Fft fft(nn);

  PreparedState out{QuantumState{grid, std::vector<cplx>(nn)}, {}};
  std::vector<cplx> hat(nn);

  if (shape == InitialShape::wannier) {
    // Bloch sum of band n with each Bloch vector signed against the
    // harmonic-oscillator momentum profile, so the packet is smooth in k.
    const double sigma = 1.0 / (kPi * std::sqrt(std::sqrt(down.depth())));
    const cplx global = std::pow(cplx(0.0, -1.0), n);
    for (int j = 0; j < s; ++j) {
      const std::size_t k = static_cast<std::size_t>(j * p + n);
      const auto v = down.vector(k);
      double proj = 0.0;
      for (int e = 0; e < p; ++e) {
        const double kk = grid.wavevector(down.fourier_mode(j, e)) * sigma;
        proj += v[static_cast<std::size_t>(e)] * hermite(n, kk) * std::exp(-0.5 * kk * kk);
      }
      const double sign = proj < 0.0 ? -1.0 : 1.0;
      for (int e = 0; e < p; ++e) {
        const std::ptrdiff_t m = down.fourier_mode(j, e);
        const double kk = grid.wavevector(m);
        hat[grid.slot(m)] = global * sign * v[static_cast<std::size_t>(e)] *
                            gauge(down.offset(), e - p / 2) * std::polar(1.0 / std::sqrt(s), -kk * centre);
      }
    }
  } else {
    LatticeParams site = model.params;
    const auto levels = single_site_eigenstates(site, n + 1);
    std::vector<cplx> psi(nn, 0.0);
    const auto row = levels.values.row(static_cast<std::size_t>(n));
    for (int r = 0; r < p; ++r) {
      psi[grid.wrap(static_cast<std::ptrdiff_t>(grid.home_site()) * p + r - p / 2)] = row[static_cast<std::size_t>(r)];
    }
    fft.forward(psi, hat);
  }

  // Band-limited translation by +dx.
  const double shift_points = dx * p;
  const bool on_grid = std::abs(shift_points - std::round(shift_points)) < 1e-12;
  const double nyquist = std::abs(hat[nn / 2]);
  if (!on_grid && nyquist > 1e-10) {
    out.warnings.push_back("translation by " + std::to_string(dx) +
                           " is off-grid and the state has Nyquist content " + std::to_string(nyquist) +
                           "; band-limited shift is not exact");
  }
  for (std::size_t i = 0; i < nn; ++i) hat[i] *= std::polar(1.0, -grid.wavevector(grid.mode(i)) * dx);
  fft.inverse(hat, out.state.amplitudes);
  normalize(out.state.amplitudes);
  return out;
}

std::vector<double> SpectralState::populations() const {
  std::vector<double> p(coefficients.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(coefficients[k]);
  return p;
}

std::vector<double> SpectralState::band_populations(int nbands) const {
  std::vector<double> out(static_cast<std::size_t>(nbands), 0.0);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (bands[k] < nbands) out[static_cast<std::size_t>(bands[k])] += std::norm(coefficients[k]);
  }
  return out;
}

SpectralState to_spectral(const QuantumState& psi, const BlochSpectrum& up, double max_leakage) {
  const Grid& grid = psi.grid;
  check_spectrum(grid, up);
  const std::size_t nn = grid.size();
  const int s = grid.sites();
  const int p = grid.points_per_site();
  std::vector<cplx> hat(nn);
  Fft fft(nn);
  fft.forward(psi.amplitudes, hat);

  SpectralState out;
  out.coefficients.resize(nn);
  out.energies.resize(nn);
  out.bands.resize(nn);
  out.ground_energy = up.ground_energy();
  std::vector<double> re(static_cast<std::size_t>(p)), im(static_cast<std::size_t>(p));
  double total = 0.0;
  for (int j = 0; j < s; ++j) {
    for (int e = 0; e < p; ++e) {
      const cplx x = hat[grid.slot(up.fourier_mode(j, e))] * std::conj(gauge(up.offset(), e - p / 2));
      re[static_cast<std::size_t>(e)] = x.real();
      im[static_cast<std::size_t>(e)] = x.imag();
    }
    for (int b = 0; b < p; ++b) {
      const std::size_t k = static_cast<std::size_t>(j * p + b);
      const auto v = up.vector(k);
      out.coefficients[k] = {kernels::dot(v, re), kernels::dot(v, im)};
      out.energies[k] = up.energy(k) - out.ground_energy;
      out.bands[k] = b;
      total += std::norm(out.coefficients[k]);
    }
  }
  const double psi_norm2 = psi.norm() * psi.norm();
  out.leakage = std::abs(psi_norm2 - total);
  if (out.leakage > max_leakage) {
    throw NumericError("to_spectral: leakage " + std::to_string(out.leakage) +
                           " exceeds bound; increase points per site",
                       out.leakage);
  }
  return out;
}

SpectralMoments moments(std::span<const double> pop, std::span<const double> energies) {
  if (pop.size() != energies.size() || pop.empty()) throw ParameterError("moments: size mismatch");
  long double w = 0, m1 = 0;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    w += pop[k];
    m1 += static_cast<long double>(pop[k]) * energies[k];
  }
  const long double e = m1 / w;
  long double m2 = 0, m4 = 0;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    const long double d = energies[k] - e;
    const long double d2 = d * d;
    m2 += pop[k] * d2;
    m4 += pop[k] * d2 * d2;
  }
  m2 /= w;
  m4 /= w;
  SpectralMoments out;
  out.mean = static_cast<double>(e);
  out.uncertainty = static_cast<double>(std::sqrt(m2));
  out.cutoff = *std::max_element(energies.begin(), energies.end());
  out.stationary = out.uncertainty < kStationaryWidth;
  if (!out.stationary) out.kurtosis = static_cast<double>(m4 / (m2 * m2));
  return out;
}

SpectralMoments moments(const SpectralState& s) { return moments(s.populations(), s.energies); }

double OverlapTrace::fs_distance(std::size_t i) const { return std::acos(std::min(1.0, abs(i))); }

OverlapTrace evolve_overlap(std::span<const double> pop, std::span<const double> energies,
                            std::span<const double> times) {
  if (times.empty() || times[0] != 0.0) throw ParameterError("evolve_overlap: times must start at 0");
  if (!std::is_sorted(times.begin(), times.end())) throw ParameterError("evolve_overlap: times not sorted");
  OverlapTrace tr;
  tr.times.assign(times.begin(), times.end());
  tr.overlaps.resize(times.size());
  long double w = 0;
  for (double x : pop) w += x;
  for (std::size_t i = 0; i < times.size(); ++i) {
    long double re = 0, im = 0;
    for (std::size_t k = 0; k < pop.size(); ++k) {
      if (pop[k] == 0.0) continue;
      const double ph = energies[k] * times[i];
      re += pop[k] * std::cos(ph);
      im -= pop[k] * std::sin(ph);
    }
    tr.overlaps[i] = {static_cast<double>(re / w), static_cast<double>(im / w)};
  }
  return tr;
}

OverlapTrace evolve_overlap(const SpectralState& s, std::span<const double> times) {
  return evolve_overlap(s.populations(), s.energies, times);
}

std::vector<double> uniform_times(double t_max, std::size_t n) {
  if (n < 2 || !(t_max > 0.0)) throw ParameterError("uniform_times: need n >= 2 and t_max > 0");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

QuantumState reconstruct(const SpectralState& s, const BlochSpectrum& up, double t) {
  const int sites = up.sites();
  const int p = up.points_per_site();
  const Grid grid(sites, p);
  const std::size_t nn = grid.size();
  std::vector<cplx> hat(nn);
  std::vector<double> re(static_cast<std::size_t>(p)), im(static_cast<std::size_t>(p));
  for (int j = 0; j < sites; ++j) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (int b = 0; b < p; ++b) {
      const std::size_t k = static_cast<std::size_t>(j * p + b);
      const cplx a = s.coefficients[k] * std::polar(1.0, -s.energies[k] * t);
      const auto v = up.vector(k);
      kernels::axpy(a.real(), v, re);
      kernels::axpy(a.imag(), v, im);
    }
    for (int e = 0; e < p; ++e) {
      hat[grid.slot(up.fourier_mode(j, e))] =
          cplx(re[static_cast<std::size_t>(e)], im[static_cast<std::size_t>(e)]) * gauge(up.offset(), e - p / 2);
    }
  }
  QuantumState out{grid, std::vector<cplx>(nn)};
  Fft fft(nn);
  fft.inverse(hat, out.amplitudes);
  return out;
}

double max_edge_probability(const SpectralState& s, const BlochSpectrum& up, std::span<const double> times,
                            int edge_sites) {
  double worst = 0.0;
  for (double t : times) worst = std::max(worst, reconstruct(s, up, t).edge_probability(edge_sites));
  return worst;
}

SpectralMoments direct_moments(const QuantumState& psi, const HamiltonianMatrix& h, double ground) {
  const std::size_t n = psi.amplitudes.size();
  if (h.size() != n) throw ParameterError("direct_moments: operator and state sizes differ");
  const double norm2 = psi.norm() * psi.norm();
  std::vector<cplx> y(n), z(n);
  h.apply(psi.amplitudes, y);
  cplx hm = 0.0;
  for (std::size_t i = 0; i < n; ++i) hm += std::conj(psi.amplitudes[i]) * y[i];
  const double e_abs = hm.real() / norm2;
  for (std::size_t i = 0; i < n; ++i) y[i] -= e_abs * psi.amplitudes[i];
  h.apply(y, z);
  double m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] -= e_abs * y[i];
    m2 += std::norm(y[i]);
    m4 += std::norm(z[i]);
  }
  m2 /= norm2;
  m4 /= norm2;
  SpectralMoments out;
  out.mean = e_abs - ground;
  out.uncertainty = std::sqrt(m2);
  // Gershgorin bound on the top of the spectrum.
  double top = 0.0;
  double off = 0.0;
  for (double c : h.kinetic_row().subspan(1)) off += std::abs(c);
  for (double v : h.potential()) top = std::max(top, h.kinetic_row()[0] + v + off);
  out.cutoff = top - ground;
  out.stationary = out.uncertainty < kStationaryWidth;
  if (!out.stationary) out.kurtosis = m4 / (m2 * m2);
  return out;
}

}  // namespace qslab
