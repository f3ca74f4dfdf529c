#pragma once

// Initial wave packet, exact evolution under a static lattice, two-time
// overlap and energy moments.
//
// Frame: the packet is translated by +dx and evolved under the lattice with
// minima on integer sites. This is the lab-frame problem (U_up displaced by
// +dx, packet fixed) seen from the U_up lattice.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qslab/eigensolve.hpp"
#include "qslab/model.hpp"

namespace qslab {

using cplx = std::complex<double>;

struct QuantumState {
  Grid grid;
  std::vector<cplx> amplitudes;

  double norm() const;
  cplx inner(const QuantumState& other) const;  // <this|other>
  double site_probability(int site) const;
  // Probability on the outermost `sites` sites at each edge.
  double edge_probability(int sites = 2) const;
};

enum class InitialShape {
  wannier,      // band-n Wannier function of U_down on the home site
  zero_padded,  // isolated single-site level n, zero outside the home site
};

struct PreparedState {
  QuantumState state;
  std::vector<std::string> warnings;
};

// Level n of U_down centred on the home site, translated by +dx with
// band-limited interpolation. `down` must be the spectrum of U_down on the
// model grid (offset 0).
PreparedState prepare_initial(int n, double dx, const LatticeModel& model, const BlochSpectrum& down,
                              InitialShape shape = InitialShape::wannier);

struct SpectralState {
  std::vector<cplx> coefficients;  // c_k = <phi_k|psi>, k = block * P + band
  std::vector<double> energies;    // E_k - E_ground
  std::vector<int> bands;
  double ground_energy = 0.0;      // absolute energy of the zero
  double leakage = 0.0;            // |1 - sum |c_k|^2|

  std::vector<double> populations() const;
  // Total weight per band index, length nbands.
  std::vector<double> band_populations(int nbands) const;
};

SpectralState to_spectral(const QuantumState& psi, const BlochSpectrum& up, double max_leakage = 1e-8);

inline constexpr double kStationaryWidth = 1e-8;  // E_R

struct SpectralMoments {
  double mean = 0.0;                // E
  double uncertainty = 0.0;         // Delta E
  std::optional<double> kurtosis;   // beta_2, empty when stationary
  double cutoff = 0.0;              // E_c
  bool stationary = false;          // Delta E < kStationaryWidth
};

SpectralMoments moments(const SpectralState& s);
// Same moments from weights and energies directly.
SpectralMoments moments(std::span<const double> populations, std::span<const double> energies);

struct OverlapTrace {
  std::vector<double> times;  // hbar/E_R
  std::vector<cplx> overlaps;

  std::size_t size() const { return times.size(); }
  double abs(std::size_t i) const { return std::abs(overlaps[i]); }
  double phase(std::size_t i) const { return std::arg(overlaps[i]); }
  double fs_distance(std::size_t i) const;
};

// A(t) = sum_k p_k exp(-i E_k t). times sorted with times[0] = 0.
OverlapTrace evolve_overlap(const SpectralState& s, std::span<const double> times);
OverlapTrace evolve_overlap(std::span<const double> populations, std::span<const double> energies,
                            std::span<const double> times);

// n points uniformly on [0, t_max].
std::vector<double> uniform_times(double t_max, std::size_t n);

// psi(t) on the grid, rebuilt mode by mode.
QuantumState reconstruct(const SpectralState& s, const BlochSpectrum& up, double t);

// Largest outer-site probability over the given times.
double max_edge_probability(const SpectralState& s, const BlochSpectrum& up, std::span<const double> times,
                            int edge_sites = 2);

// Moments from repeated application of H (no diagonalization); ground is the
// absolute energy taken as zero.
SpectralMoments direct_moments(const QuantumState& psi, const HamiltonianMatrix& h, double ground);

}  // namespace qslab
