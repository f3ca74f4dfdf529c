#include "qslab/qsl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qslab/error.hpp"

namespace qslab {
namespace {

// Domain ends are computed from moments; let the last grid point through.
bool within(double t, double end) { return t <= end * (1.0 + 1e-12); }

void check_time(double t) {
  if (!(t >= 0.0)) throw ParameterError("bound: negative time");
}

}  // namespace

double mt_time(double dE) {
  return dE > 0.0 ? kPi / (2.0 * dE) : std::numeric_limits<double>::infinity();
}

double ml_time(double E) {
  return E > 0.0 ? kPi / (2.0 * E) : std::numeric_limits<double>::infinity();
}

std::optional<double> crossover_time(double E, double dE) {
  if (!(dE > 0.0) || !(E > 0.0) || dE < E) return std::nullopt;
  const double tmt = mt_time(dE);
  return tmt * tmt / ml_time(E);
}

Bound mt_bound(double dE, double t) {
  check_time(t);
  if (!(dE > 0.0)) return {1.0, BoundStatus::undefined};
  if (!within(t, mt_time(dE))) return {0.0, BoundStatus::beyond_domain};
  return {std::cos(std::min(dE * t, kPi / 2.0)), BoundStatus::ok};
}

Bound ml_bound(double E, double t) {
  check_time(t);
  if (!(E > 0.0)) return {1.0, BoundStatus::undefined};
  if (!within(t, ml_time(E))) return {0.0, BoundStatus::beyond_domain};
  return {std::cos(std::min(std::sqrt(kPi * E * t / 2.0), kPi / 2.0)), BoundStatus::ok};
}

Bound unified_bound(double E, double dE, double t) {
  const Bound a = mt_bound(dE, t);
  const Bound b = ml_bound(E, t);
  if (a.valid() && b.valid()) return a.value >= b.value ? a : b;
  if (a.valid()) return a;
  if (b.valid()) return b;
  if (a.status == BoundStatus::undefined && b.status == BoundStatus::undefined) return {1.0, BoundStatus::undefined};
  return {0.0, BoundStatus::beyond_domain};
}

Regime classify(double E, double dE) { return dE > E ? Regime::ML : Regime::MT; }

std::string_view name(Regime r) { return r == Regime::ML ? "ML" : "MT"; }

PathGeometry path_geometry(const OverlapTrace& trace, double dE) {
  PathGeometry g;
  g.times = trace.times;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double l = dE * trace.times[i];
    const double d = trace.fs_distance(i);
    g.path_length.push_back(l);
    g.geodesic.push_back(d);
    g.ratio.push_back(l > 0.0 ? d / l : 1.0);
  }
  return g;
}

double deviation_from_kurtosis(double beta2) {
  if (!(beta2 >= 1.0 - 1e-12)) {
    throw NumericError("kurtosis " + std::to_string(beta2) + " below 1", beta2);
  }
  return std::max(0.0, (beta2 - 1.0) / 2.0);
}

GeometryFit deviation_from_geometry(std::span<const double> times, std::span<const double> ratios,
                                    double tau_mt, double window) {
  if (times.size() != ratios.size()) throw ParameterError("geometry fit: series lengths differ");
  if (!(tau_mt > 0.0)) throw ParameterError("geometry fit: tau_MT must be positive");
  std::vector<double> s, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > 0.0 && within(times[i], window * tau_mt)) {
      s.push_back(times[i] / tau_mt);
      y.push_back(ratios[i] - 1.0);
    }
  }
  if (s.size() < 6) throw ParameterError("geometry fit: fewer than 6 samples in window");
  Matrix x(s.size(), 2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    x(i, 0) = s[i] * s[i];
    x(i, 1) = x(i, 0) * x(i, 0);
  }
  const LeastSquares ls = least_squares(x, y);
  const double k = -48.0 / (kPi * kPi);
  GeometryFit f;
  f.xi = k * ls.coefficients[0];
  f.c4 = ls.coefficients[1];
  f.covariance = Matrix(2, 2);
  f.covariance(0, 0) = k * k * ls.covariance(0, 0);
  f.covariance(0, 1) = f.covariance(1, 0) = k * ls.covariance(0, 1);
  f.covariance(1, 1) = ls.covariance(1, 1);
  f.xi_error = std::sqrt(f.covariance(0, 0));
  f.samples = s.size();
  return f;
}

namespace {

void scan_margins(const OverlapTrace& tr, const SpectralMoments& m, QslReport& r) {
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const double a = tr.abs(i);
    if (const Bound u = unified_bound(m.mean, m.uncertainty, t); u.valid()) {
      r.min_margin = std::min(r.min_margin, a - u.value);
    }
    if (const Bound b = mt_bound(m.uncertainty, t); b.valid()) r.mt_margin = std::min(r.mt_margin, a - b.value);
    if (const Bound b = ml_bound(m.mean, t); b.valid()) r.ml_margin = std::min(r.ml_margin, a - b.value);
  }
}

}  // namespace

QslReport report(const SpectralMoments& m, const OverlapTrace& mt_trace, const OverlapTrace* ml_trace) {
  QslReport r;
  r.E = m.mean;
  r.dE = m.uncertainty;
  r.cutoff = m.cutoff;
  r.stationary = m.stationary;
  r.tau_mt = mt_time(m.uncertainty);
  r.tau_ml = ml_time(m.mean);
  r.regime = classify(m.mean, m.uncertainty);
  if (m.stationary) return r;
  r.tau_c = crossover_time(m.mean, m.uncertainty);
  if (m.kurtosis) r.xi_spectral = deviation_from_kurtosis(*m.kurtosis);
  r.min_margin = r.mt_margin = r.ml_margin = std::numeric_limits<double>::infinity();
  scan_margins(mt_trace, m, r);
  if (ml_trace) scan_margins(*ml_trace, m, r);
  const PathGeometry g = path_geometry(mt_trace, m.uncertainty);
  const GeometryFit f = deviation_from_geometry(g.times, g.ratio, r.tau_mt);
  r.xi_fit = f.xi;
  r.xi_fit_error = f.xi_error;
  return r;
}

double bhatia_davis_cap(double E, double dE, double Ec) {
  if (!(dE > 0.0)) throw ParameterError("bhatia_davis_cap: dE must be positive");
  if (!(E >= 0.0 && E <= Ec)) throw ParameterError("bhatia_davis_cap: mean energy outside [0, Ec]");
  const double a = (Ec - E) / dE;
  const double b = E / dE;
  return 0.5 * (std::max(a * a, b * b) - 1.0);
}

double xi_harmonic(int n, double dE, double omega) {
  static constexpr double base[] = {1.0, 1.0 / 3.0, 7.0 / 25.0};
  if (n < 0 || n > 2) throw ParameterError("xi_harmonic: n must be 0, 1 or 2");
  if (!(dE > 0.0)) throw ParameterError("xi_harmonic: dE must be positive");
  return base[n] + omega * omega / (2.0 * dE * dE);
}

std::vector<double> displaced_populations(int n, double alpha, int max_level) {
  if (n < 0 || n > 2) throw ParameterError("displaced_populations: n must be 0, 1 or 2");
  if (!(alpha >= 0.0)) throw ParameterError("displaced_populations: alpha must be >= 0");
  const double x = alpha * alpha;
  if (max_level < 0) max_level = static_cast<int>(std::ceil(x + 12.0 * std::sqrt(x) + 20.0)) + n;
  std::vector<double> p(static_cast<std::size_t>(max_level) + 1, 0.0);
  if (x == 0.0) {
    if (n <= max_level) p[static_cast<std::size_t>(n)] = 1.0;
    return p;
  }
  for (int k = 0; k <= max_level; ++k) {
    const double kk = k;
    const double p0 = std::exp(-x + kk * std::log(x) - std::lgamma(kk + 1.0));
    double w = 1.0;
    if (n == 1) {
      w = (x - kk) * (x - kk) / x;
    } else if (n == 2) {
      const double q = x * x - 2.0 * kk * x + kk * kk - kk;
      w = q * q / (2.0 * x * x);
    }
    p[static_cast<std::size_t>(k)] = w * p0;
  }
  return p;
}

double QubitModel::overlap(double t) const {
  const double s = std::sin(zeta);
  const double w = std::sin(omega * t / 2.0);
  return std::sqrt(std::max(0.0, 1.0 - s * s * w * w));
}

Bound QubitModel::inverted_bound(double t) const {
  if (!(t >= 0.0)) throw ParameterError("bound: negative time");
  if (!(zeta > kPi / 2.0 && zeta < kPi)) return {1.0, BoundStatus::undefined};
  const double gap = omega * p0;  // omega - E
  if (!within(t, kPi / (2.0 * gap))) return {0.0, BoundStatus::beyond_domain};
  return {std::cos(std::min(std::sqrt(kPi * gap * t / 2.0), kPi / 2.0)), BoundStatus::ok};
}

QubitModel qubit_model(double zeta, double omega) {
  if (!(zeta >= 0.0 && zeta <= kPi)) throw ParameterError("qubit_model: zeta outside [0, pi]");
  if (!(omega > 0.0)) throw ParameterError("qubit_model: omega must be positive");
  QubitModel q;
  q.zeta = zeta;
  q.omega = omega;
  q.dE = omega * std::sin(zeta) / 2.0;
  const double h = std::sin(zeta / 2.0);
  const double c = std::cos(zeta / 2.0);
  q.E = omega * h * h;
  q.p0 = c * c;
  q.p1 = h * h;
  q.dE_max = omega / 2.0;
  q.stationary = zeta == 0.0 || zeta == kPi;
  if (!q.stationary) q.xi = 2.0 * (q.dE_max * q.dE_max / (q.dE * q.dE) - 1.0);
  return q;
}

}  // namespace qslab
