#pragma once

// Ramsey measurement chain: fringe synthesis, binomial detection noise,
// cosine fits, and the short-time estimators for E, dE and xi.
//
// Convention: A(t) = V exp{-i [phi + E_n t]}, p_down = (1 - V cos(phi_R - phi)) / 2.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qslab/dynamics.hpp"
#include "qslab/qsl.hpp"

namespace qslab {

struct RamseyConfig {
  std::vector<double> phase_grid;  // phi_R in [0, 2 pi)
  int atoms_per_shot = 20;
  int repetitions = 10;
  double loss_fraction = 0.05;
  double light_shift_slope = 0.0;  // rad/us
  std::uint64_t rng_seed = 1;

  static constexpr double kMeasuredLightShift = 81.0;  // rad/us

  // K = 12 equally spaced phases, other fields at their defaults.
  static RamseyConfig defaults(int k = 12);
  void validate() const;
  long detections() const { return static_cast<long>(atoms_per_shot) * repetitions; }
};

struct FringeSample {
  double phi_r;
  long n_total;
  long n_down;
};

struct FringeFit {
  double v = 0.0;      // clamped to [0, 1]
  double v_raw = 0.0;  // unclamped fit value
  double v_err = 0.0;
  double phi = 0.0;    // (-pi, pi]
  double phi_err = 0.0;
  double offset = 0.0;
  bool phase_identifiable = true;
};

struct FringeRecord {
  double t = 0.0;                      // hbar/E_R
  std::vector<FringeSample> samples;   // empty for noiseless records
  std::vector<double> p_down;          // per phase, loss-renormalized
  FringeFit fit;
};

// Exact p_down at reference phase phi_r; extra_phase models the light shift.
double ideal_fringe(cplx A, double phi_r, double En, double t, double extra_phase = 0.0);

// Counter-based seed for the stream of (seed, time index, phase index).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t t_index, std::uint64_t phase_index);

// Binomial detection of down atoms at every phase of the grid.
std::vector<FringeSample> sample_fringe(cplx A, double t, double En, const RamseyConfig& cfg,
                                        std::size_t t_index, double time_unit_us);

// Linear least squares of a + b cos phi_R + c sin phi_R.
FringeFit fit_fringe(std::span<const double> phases, std::span<const double> p_down);
FringeFit fit_fringe(std::span<const FringeSample> samples, double loss_fraction);

// Nearest-branch continuation of wrapped phases.
std::vector<double> unwrap(std::span<const double> phases);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  std::vector<double> coefficients;
  std::size_t samples = 0;
};

// phi(t) - slope t, unwrapped, fitted by a1 t + a3 t^3 + a5 t^5 on
// [0, min(window_end, first wrap)]; E = a1 + E_n. slope in rad per hbar/E_R.
Estimate extract_mean_energy(std::span<const double> times, std::span<const double> phases, double En,
                             double slope, double window_end);

// V(t) = 1 + b2 t^2 + b4 t^4 + b6 t^6 on [0, window_end]; dE = sqrt(-2 b2).
Estimate extract_uncertainty(std::span<const double> times, std::span<const double> visibility,
                             double window_end);

// arccos V / (dE t) with dE = pi / (2 tau_MT), fitted by deviation_from_geometry.
GeometryFit extract_xi(std::span<const double> times, std::span<const double> visibility, double tau_mt,
                       double window = 0.3);

inline constexpr double kPhaseWindow = 0.35;       // x tau_MT
inline constexpr double kVisibilityWindow = 1.0;   // x tau_MT

struct ExperimentResult {
  std::vector<FringeRecord> records;
  Estimate mean_energy;
  Estimate uncertainty;
  std::optional<GeometryFit> xi;
  std::vector<double> phases;  // light-shift corrected, unwrapped
};

// Runs the fringe chain over an overlap trace sampled on [0, tau_MT].
// noisy = false fits exact probabilities.
ExperimentResult simulate_experiment(const OverlapTrace& trace, double En, double tau_mt,
                                     const RamseyConfig& cfg, double time_unit_us, bool noisy);

}  // namespace qslab
