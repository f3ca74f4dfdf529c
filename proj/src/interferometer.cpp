#include "qslab/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qslab/error.hpp"

namespace qslab {

RamseyConfig RamseyConfig::defaults(int k) {
  RamseyConfig c;
  for (int i = 0; i < k; ++i) c.phase_grid.push_back(2.0 * kPi * i / k);
  return c;
}

void RamseyConfig::validate() const {
  std::vector<double> p = phase_grid;
  std::sort(p.begin(), p.end());
  const auto distinct = std::unique(p.begin(), p.end()) - p.begin();
  if (distinct < 6) throw ParameterError("ramsey: need at least 6 distinct phases");
  for (double x : phase_grid) {
    if (!(x >= 0.0 && x < 2.0 * kPi)) throw ParameterError("ramsey: phase outside [0, 2 pi)");
  }
  if (atoms_per_shot < 1 || repetitions < 1) throw ParameterError("ramsey: atom and repetition counts must be positive");
  if (!(loss_fraction >= 0.0 && loss_fraction < 1.0)) throw ParameterError("ramsey: loss fraction outside [0, 1)");
}

double ideal_fringe(cplx A, double phi_r, double En, double t, double extra_phase) {
  const double v = std::abs(A);
  const double phi = -std::arg(A) - En * t + extra_phase;
  return std::clamp(0.5 * (1.0 - v * std::cos(phi_r - phi)), 0.0, 1.0);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double wrap_pi(double x) {
  double y = std::remainder(x, 2.0 * kPi);
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t t_index, std::uint64_t phase_index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ t_index) ^ (phase_index * 0xd1b54a32d192ed03ULL));
}

std::vector<FringeSample> sample_fringe(cplx A, double t, double En, const RamseyConfig& cfg,
                                        std::size_t t_index, double time_unit_us) {
  const long n = cfg.detections();
  const double slope = cfg.light_shift_slope * time_unit_us;
  std::vector<FringeSample> out;
  out.reserve(cfg.phase_grid.size());
  for (std::size_t k = 0; k < cfg.phase_grid.size(); ++k) {
    const double phi_r = cfg.phase_grid[k];
    const double p = ideal_fringe(A, phi_r, En, t, slope * t);
    std::mt19937_64 rng(stream_seed(cfg.rng_seed, t_index, k));
    std::binomial_distribution<long> draw(n, std::clamp((1.0 - cfg.loss_fraction) * p, 0.0, 1.0));
    out.push_back({phi_r, n, draw(rng)});
  }
  return out;
}

FringeFit fit_fringe(std::span<const double> phases, std::span<const double> p_down) {
  if (phases.size() != p_down.size()) throw ParameterError("fit_fringe: size mismatch");
  std::vector<double> d(phases.begin(), phases.end());
  std::sort(d.begin(), d.end());
  if (std::unique(d.begin(), d.end()) - d.begin() < 6) throw ParameterError("fit_fringe: need 6 distinct phases");
  Matrix x(phases.size(), 3);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(phases[i]);
    x(i, 2) = std::sin(phases[i]);
  }
  const LeastSquares ls = least_squares(x, p_down);
  const double a = ls.coefficients[0];
  const double b = ls.coefficients[1];
  const double c = ls.coefficients[2];
  const double r2 = b * b + c * c;
  const double r = std::sqrt(r2);
  FringeFit f;
  f.offset = a;
  f.v_raw = 2.0 * r;
  f.v = std::clamp(f.v_raw, 0.0, 1.0);
  f.phi = wrap_pi(std::atan2(-c, -b));
  const double sbb = ls.covariance(1, 1), scc = ls.covariance(2, 2), sbc = ls.covariance(1, 2);
  if (r > 0.0) {
    f.v_err = 2.0 * std::sqrt(std::max(0.0, (b * b * sbb + c * c * scc + 2.0 * b * c * sbc) / r2));
    f.phi_err = std::sqrt(std::max(0.0, (c * c * sbb + b * b * scc - 2.0 * b * c * sbc) / (r2 * r2)));
  } else {
    f.v_err = 2.0 * std::sqrt(0.5 * (sbb + scc));
    f.phi_err = std::numeric_limits<double>::infinity();
  }
  f.phase_identifiable = f.v_raw > 1e-9 && f.v_raw > 3.0 * f.v_err;
  return f;
}

FringeFit fit_fringe(std::span<const FringeSample> samples, double loss_fraction) {
  std::vector<double> phases, p;
  for (const auto& s : samples) {
    if (s.n_total <= 0) throw ParameterError("fit_fringe: sample without detections");
    phases.push_back(s.phi_r);
    p.push_back(static_cast<double>(s.n_down) / (static_cast<double>(s.n_total) * (1.0 - loss_fraction)));
  }
  return fit_fringe(phases, p);
}

std::vector<double> unwrap(std::span<const double> phases) {
  std::vector<double> out(phases.begin(), phases.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = phases[i] - phases[i - 1];
    d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
    out[i] = out[i - 1] + d;
  }
  return out;
}

Estimate extract_mean_energy(std::span<const double> times, std::span<const double> phases, double En,
                             double slope, double window_end) {
  if (times.size() != phases.size()) throw ParameterError("extract_mean_energy: size mismatch");
  std::vector<double> corrected(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) corrected[i] = wrap_pi(phases[i] - slope * times[i]);
  const std::vector<double> u = unwrap(corrected);
  std::vector<double> t, y;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > kPi) break;
    if (times[i] > window_end * (1.0 + 1e-12)) break;
    t.push_back(times[i]);
    y.push_back(u[i]);
  }
  if (t.size() < 7) throw ParameterError("extract_mean_energy: fewer than 7 points in window");
  Matrix x(t.size(), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    x(i, 0) = t[i];
    x(i, 1) = t[i] * t[i] * t[i];
    x(i, 2) = x(i, 1) * t[i] * t[i];
  }
  const LeastSquares ls = least_squares(x, y);
  Estimate e;
  e.value = ls.coefficients[0] + En;
  e.error = ls.error(0);
  e.coefficients = ls.coefficients;
  e.samples = t.size();
  return e;
}

Estimate extract_uncertainty(std::span<const double> times, std::span<const double> visibility,
                             double window_end) {
  if (times.size() != visibility.size()) throw ParameterError("extract_uncertainty: size mismatch");
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > window_end * (1.0 + 1e-12)) break;
    t.push_back(times[i]);
    y.push_back(visibility[i] - 1.0);
  }
  if (t.size() < 4) throw ParameterError("extract_uncertainty: fewer than 4 points in window");
  Matrix x(t.size(), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double t2 = t[i] * t[i];
    x(i, 0) = t2;
    x(i, 1) = t2 * t2;
    x(i, 2) = t2 * t2 * t2;
  }
  const LeastSquares ls = least_squares(x, y);
  const double b2 = ls.coefficients[0];
  if (!(b2 < 0.0)) throw EstimationError("extract_uncertainty: quadratic coefficient not negative (flat signal)");
  Estimate e;
  e.value = std::sqrt(-2.0 * b2);
  e.error = ls.error(0) / e.value;
  e.coefficients = ls.coefficients;
  e.samples = t.size();
  return e;
}

GeometryFit extract_xi(std::span<const double> times, std::span<const double> visibility, double tau_mt,
                       double window) {
  if (times.size() != visibility.size()) throw ParameterError("extract_xi: size mismatch");
  const double dE = kPi / (2.0 * tau_mt);
  std::vector<double> ratio(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double l = dE * times[i];
    ratio[i] = l > 0.0 ? std::acos(std::clamp(visibility[i], -1.0, 1.0)) / l : 1.0;
  }
  return deviation_from_geometry(times, ratio, tau_mt, window);
}

ExperimentResult simulate_experiment(const OverlapTrace& trace, double En, double tau_mt,
                                     const RamseyConfig& cfg, double time_unit_us, bool noisy) {
  cfg.validate();
  const double slope = cfg.light_shift_slope * time_unit_us;
  ExperimentResult out;
  std::vector<double> phases, vis;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    FringeRecord rec;
    rec.t = trace.times[i];
    if (noisy) {
      rec.samples = sample_fringe(trace.overlaps[i], rec.t, En, cfg, i, time_unit_us);
      for (const auto& s : rec.samples) {
        rec.p_down.push_back(static_cast<double>(s.n_down) /
                             (static_cast<double>(s.n_total) * (1.0 - cfg.loss_fraction)));
      }
    } else {
      for (double phi_r : cfg.phase_grid) {
        rec.p_down.push_back(ideal_fringe(trace.overlaps[i], phi_r, En, rec.t, slope * rec.t));
      }
    }
    rec.fit = fit_fringe(cfg.phase_grid, rec.p_down);
    phases.push_back(rec.fit.phi);
    vis.push_back(rec.fit.v_raw);
    out.records.push_back(std::move(rec));
  }
  std::vector<double> corrected(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i) corrected[i] = wrap_pi(phases[i] - slope * trace.times[i]);
  out.phases = unwrap(corrected);
  out.mean_energy = extract_mean_energy(trace.times, phases, En, slope, kPhaseWindow * tau_mt);
  out.uncertainty = extract_uncertainty(trace.times, vis, kVisibilityWindow * tau_mt);
  try {
    out.xi = extract_xi(trace.times, vis, kPi / (2.0 * out.uncertainty.value));
  } catch (const ParameterError&) {
    out.xi.reset();
  }
  return out;
}

}  // namespace qslab
