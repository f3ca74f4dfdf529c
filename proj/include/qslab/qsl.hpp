#pragma once

// Mandelstam-Tamm / Margolus-Levitin bounds, orthogonalization and crossover
// times, Fubini-Study path geometry, the deviation coefficient xi and the
// closed-form reference models.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qslab/dynamics.hpp"
#include "qslab/linalg.hpp"

namespace qslab {

enum class BoundStatus { ok, beyond_domain, undefined };

struct Bound {
  double value = 0.0;
  BoundStatus status = BoundStatus::undefined;
  bool valid() const { return status == BoundStatus::ok; }
};

double mt_time(double dE);  // pi / (2 dE)
double ml_time(double E);   // pi / (2 E)
// tau_MT^2 / tau_ML when tau_MT <= tau_ML.
std::optional<double> crossover_time(double E, double dE);

// cos(dE t) on [0, tau_MT].
Bound mt_bound(double dE, double t);
// cos(sqrt(pi E t / 2)) on [0, tau_ML]; undefined for E = 0.
Bound ml_bound(double E, double t);
// Larger of the components valid at t.
Bound unified_bound(double E, double dE, double t);

enum class Regime { MT, ML };
Regime classify(double E, double dE);  // ML iff dE > E
std::string_view name(Regime r);

struct PathGeometry {
  std::vector<double> times;
  std::vector<double> path_length;  // dE t
  std::vector<double> geodesic;     // arccos |A|
  std::vector<double> ratio;        // geodesic / path_length, 1 at t = 0
};

PathGeometry path_geometry(const OverlapTrace& trace, double dE);

double deviation_from_kurtosis(double beta2);

struct GeometryFit {
  double xi = 0.0;
  double xi_error = 0.0;
  double c4 = 0.0;
  Matrix covariance;  // (xi, c4)
  std::size_t samples = 0;
};

// Fits ratio = 1 - (pi^2 xi / 48) s^2 + c4 s^4, s = t / tau_MT, on
// 0 < t <= window tau_MT.
GeometryFit deviation_from_geometry(std::span<const double> times, std::span<const double> ratios,
                                    double tau_mt, double window = 0.3);

struct QslReport {
  double E = 0.0;
  double dE = 0.0;
  double tau_mt = 0.0;
  double tau_ml = 0.0;
  std::optional<double> tau_c;
  Regime regime = Regime::MT;
  std::optional<double> xi_spectral;
  std::optional<double> xi_fit;
  double xi_fit_error = 0.0;
  double min_margin = 0.0;  // min |A| - unified bound over both traces
  double mt_margin = 0.0;   // min |A| - MT bound on [0, tau_MT]
  double ml_margin = 0.0;   // min |A| - ML bound on [0, tau_ML]
  double cutoff = 0.0;
  bool stationary = false;
};

inline constexpr double kMarginTolerance = 1e-9;

// mt_trace must cover [0, tau_MT]; ml_trace, if given, [0, tau_ML].
QslReport report(const SpectralMoments& m, const OverlapTrace& mt_trace,
                 const OverlapTrace* ml_trace = nullptr);

// xi <= (max{((Ec - E)/dE)^2, (E/dE)^2} - 1) / 2 for spectra on [0, Ec].
double bhatia_davis_cap(double E, double dE, double Ec);

// Displaced harmonic eigenstates: {1, 1/3, 7/25}[n] + omega^2 / (2 dE^2).
double xi_harmonic(int n, double dE, double omega);

// |<n'|D(alpha)|n>|^2 for n' = 0..max_level (auto-sized when negative).
std::vector<double> displaced_populations(int n, double alpha, int max_level = -1);

struct QubitModel {
  double zeta = 0.0;
  double omega = 0.0;
  double dE = 0.0;
  double E = 0.0;
  double dE_max = 0.0;
  double p0 = 1.0;  // cos^2(zeta/2)
  double p1 = 0.0;  // sin^2(zeta/2)
  std::optional<double> xi;
  bool stationary = false;

  double overlap(double t) const;  // |A(t)|
  // For pi/2 < zeta < pi: cos(sqrt(cos^2(zeta/2) pi omega t / 2)).
  Bound inverted_bound(double t) const;
};

QubitModel qubit_model(double zeta, double omega);

}  // namespace qslab
