#pragma once

// Units, lattice geometry, spin-dependent potentials and the discretized
// single-particle Hamiltonian.
//
// Internal units: length in lattice constants (lambda/2), energy in recoil
// energies E_R, hbar = 1, time in hbar/E_R. SI appears only in Units.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qslab/linalg.hpp"

namespace qslab {

inline constexpr double kPi = 3.14159265358979323846;
// hbar^2 / (2 m (lambda/2)^2) in units of E_R.
inline constexpr double kKinetic = 1.0 / (kPi * kPi);

struct PhysicalConstants {
  double hbar;       // J s
  double boltzmann;  // J/K
  double atom_mass;  // kg

  PhysicalConstants(double hbar, double boltzmann, double atom_mass);
  // CODATA 2018 values with the mass of 133Cs.
  static PhysicalConstants cesium133();
};

struct RecoilEnergy {
  double joules;
  double hertz;  // E_R / h
};

RecoilEnergy recoil_energy(const PhysicalConstants& c, double wavelength_m);

// Conversion between the dimensionless model and SI at I/O boundaries.
class Units {
 public:
  Units(const PhysicalConstants& c, double wavelength_m);

  const PhysicalConstants& constants() const { return constants_; }
  double wavelength_m() const { return wavelength_; }
  double recoil_joules() const { return recoil_.joules; }
  double recoil_hertz() const { return recoil_.hertz; }
  double time_unit_s() const { return constants_.hbar / recoil_.joules; }
  double time_unit_us() const { return 1e6 * time_unit_s(); }
  double length_unit_m() const { return wavelength_ / 2.0; }

  double energy_to_hz(double e) const { return e * recoil_.hertz; }
  double hz_to_energy(double hz) const { return hz / recoil_.hertz; }
  double to_us(double t) const { return t * time_unit_us(); }
  double from_us(double us) const { return us / time_unit_us(); }
  // Angular frequency (rad/s) of an energy quantum e (E_R).
  double energy_to_rad_per_s(double e) const { return e / time_unit_s(); }

 private:
  PhysicalConstants constants_;
  double wavelength_;
  RecoilEnergy recoil_;
};

struct LatticeParams {
  double wavelength_m = 866e-9;
  double depth_at_zero = 270.0;    // U0(0), E_R
  double polarization_angle = 0.0; // theta, rad
  int vibrational_index = 0;
  int sites = 33;                  // odd
  int points_per_site = 64;        // power of two

  void validate() const;  // throws ParameterError
  std::size_t grid_size() const {
    return static_cast<std::size_t>(sites) * static_cast<std::size_t>(points_per_site);
  }
};

// Relative displacement of the two spin lattices, lambda/2 units.
double displacement_from_angle(double theta);
double angle_from_displacement(double dx);
// U0(theta) in E_R.
double trap_depth(double theta, double depth_at_zero);

struct TrapFrequency {
  double energy;      // hbar omega_HO in E_R
  double rad_per_s;
  double hertz() const { return rad_per_s / (2.0 * kPi); }
};

// Harmonic expansion of -U0 cos^2(pi u): hbar omega = 2 sqrt(U0 E_R).
// The printed closed form sqrt(2 U0 / (m lambda^2)) is short by 2 pi against
// the quoted 2 pi x 66 kHz; we use the expansion and do not patch it elsewhere.
TrapFrequency trap_frequency(double theta, double depth_at_zero, const Units& units);

class Grid {
 public:
  Grid(int sites, int points_per_site);

  std::size_t size() const { return n_; }
  int sites() const { return sites_; }
  int points_per_site() const { return points_; }
  double spacing() const { return 1.0 / points_; }
  double position(std::size_t i) const { return static_cast<double>(i) / points_; }
  std::size_t wrap(std::ptrdiff_t i) const;
  int home_site() const { return (sites_ - 1) / 2; }
  // Fourier mode index m in [-N/2, N/2) of FFT slot i, and back.
  std::ptrdiff_t mode(std::size_t slot) const;
  std::size_t slot(std::ptrdiff_t mode) const { return wrap(mode); }
  // Wavevector of mode m: 2 pi m / S.
  double wavevector(std::ptrdiff_t mode) const;

 private:
  int sites_;
  int points_;
  std::size_t n_;
};

enum class Spin { up, down };

struct Potential {
  Spin spin;
  double depth;         // U0(theta)
  double displacement;  // u0, minima at u0 + integer
  std::vector<double> values;

  double at(double u) const;
};

// Sinusoid -depth cos^2(pi (u - offset)) sampled on the grid.
Potential lattice_potential(const Grid& grid, double depth, double offset, Spin spin);
// U_down has minima on integer sites; U_up is displaced by +dx(theta).
Potential build_potential(const LatticeParams& params, const Grid& grid, Spin spin);

enum class KineticScheme { three_point, spectral };

// Real symmetric N x N operator: circulant kinetic part plus diagonal V.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix(std::vector<double> kinetic_row, std::vector<double> potential,
                    KineticScheme scheme);

  std::size_t size() const { return potential_.size(); }
  KineticScheme scheme() const { return scheme_; }
  double operator()(std::size_t i, std::size_t j) const;
  std::span<const double> kinetic_row() const { return {row_.data(), size()}; }
  std::span<const double> potential() const { return potential_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  void apply(std::span<const std::complex<double>> x, std::span<std::complex<double>> y) const;
  Matrix to_dense() const;

 private:
  KineticScheme scheme_;
  std::vector<double> row_;  // circulant row, stored twice for contiguous dots
  std::vector<double> potential_;
};

HamiltonianMatrix build_hamiltonian(const Potential& potential, const Grid& grid,
                                    KineticScheme scheme = KineticScheme::three_point);

// Everything derived from one LatticeParams.
struct LatticeModel {
  LatticeParams params;
  Units units;
  Grid grid;
  double depth;         // U0(theta)
  double displacement;  // dx(theta)
  TrapFrequency trap;

  explicit LatticeModel(const LatticeParams& p,
                        const PhysicalConstants& c = PhysicalConstants::cesium133());
};

}  // namespace qslab
