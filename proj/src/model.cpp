#include "qslab/model.hpp"

#include <cmath>
#include <string>

#include "qslab/error.hpp"
#include "qslab/kernels.hpp"
#include "qslab/linalg.hpp"

namespace qslab {

PhysicalConstants::PhysicalConstants(double h, double kb, double m)
    : hbar(h), boltzmann(kb), atom_mass(m) {
  if (!(h > 0.0) || !(kb > 0.0) || !(m > 0.0)) {
    throw ParameterError("physical constants must be strictly positive");
  }
}

PhysicalConstants PhysicalConstants::cesium133() {
  constexpr double hbar = 1.054571817e-34;
  constexpr double kb = 1.380649e-23;
  constexpr double u = 1.66053906660e-27;
  return PhysicalConstants(hbar, kb, 132.905451961 * u);
}

RecoilEnergy recoil_energy(const PhysicalConstants& c, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw ParameterError("wavelength must be positive");
  const double p = 2.0 * kPi * c.hbar / wavelength_m;
  const double joules = p * p / (2.0 * c.atom_mass);
  return {joules, joules / (2.0 * kPi * c.hbar)};
}

Units::Units(const PhysicalConstants& c, double wavelength_m)
    : constants_(c), wavelength_(wavelength_m), recoil_(recoil_energy(c, wavelength_m)) {}

void LatticeParams::validate() const {
  if (!(wavelength_m > 0.0)) throw ParameterError("lattice: wavelength must be positive");
  if (!(depth_at_zero > 0.0)) throw ParameterError("lattice: depth must be positive");
  if (!(polarization_angle >= 0.0 && polarization_angle <= kPi / 2.0)) {
    throw ParameterError("lattice: polarization angle outside [0, pi/2]");
  }
  if (vibrational_index < 0) throw ParameterError("lattice: vibrational index must be >= 0");
  if (sites < 1 || sites % 2 == 0) throw ParameterError("lattice: site count must be odd");
  if (points_per_site < 4 || (points_per_site & (points_per_site - 1)) != 0) {
    throw ParameterError("lattice: points per site must be a power of two >= 4");
  }
}

namespace {

void check_angle(double theta) {
  if (!(theta >= 0.0 && theta <= kPi / 2.0)) {
    throw ParameterError("polarization angle " + std::to_string(theta) + " outside [0, pi/2]");
  }
}

}  // namespace

double displacement_from_angle(double theta) {
  check_angle(theta);
  if (theta == kPi / 2.0) return 0.5;
  return std::atan(0.75 * std::tan(theta)) / kPi;
}

double angle_from_displacement(double dx) {
  if (!(dx >= 0.0 && dx <= 0.5)) {
    throw ParameterError("displacement " + std::to_string(dx) + " outside [0, 0.5]");
  }
  if (dx == 0.5) return kPi / 2.0;
  return std::atan(4.0 / 3.0 * std::tan(kPi * dx));
}

double trap_depth(double theta, double depth_at_zero) {
  check_angle(theta);
  if (!(depth_at_zero > 0.0)) throw ParameterError("depth must be positive");
  return depth_at_zero * std::sqrt((25.0 + 7.0 * std::cos(2.0 * theta)) / 32.0);
}

TrapFrequency trap_frequency(double theta, double depth_at_zero, const Units& units) {
  const double e = 2.0 * std::sqrt(trap_depth(theta, depth_at_zero));
  return {e, units.energy_to_rad_per_s(e)};
}

Grid::Grid(int sites, int points_per_site) : sites_(sites), points_(points_per_site) {
  if (sites < 1 || points_per_site < 1) throw ParameterError("grid: sizes must be positive");
  n_ = static_cast<std::size_t>(sites) * static_cast<std::size_t>(points_per_site);
  if (n_ < 3) throw ParameterError("grid: need at least 3 points");
}

std::size_t Grid::wrap(std::ptrdiff_t i) const {
  const auto n = static_cast<std::ptrdiff_t>(n_);
  std::ptrdiff_t r = i % n;
  if (r < 0) r += n;
  return static_cast<std::size_t>(r);
}

std::ptrdiff_t Grid::mode(std::size_t slot) const {
  const auto s = static_cast<std::ptrdiff_t>(slot);
  const auto n = static_cast<std::ptrdiff_t>(n_);
  return s < n / 2 ? s : s - n;
}

double Grid::wavevector(std::ptrdiff_t mode) const {
  return 2.0 * kPi * static_cast<double>(mode) / sites_;
}

double Potential::at(double u) const {
  const double c = std::cos(kPi * (u - displacement));
  return -depth * c * c;
}

Potential lattice_potential(const Grid& grid, double depth, double offset, Spin spin) {
  Potential pot{spin, depth, offset, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) pot.values[i] = pot.at(grid.position(i));
  return pot;
}

Potential build_potential(const LatticeParams& params, const Grid& grid, Spin spin) {
  params.validate();
  const double theta = params.polarization_angle;
  const double depth = trap_depth(theta, params.depth_at_zero);
  const double offset = spin == Spin::up ? displacement_from_angle(theta) : 0.0;
  return lattice_potential(grid, depth, offset, spin);
}

HamiltonianMatrix::HamiltonianMatrix(std::vector<double> kinetic_row, std::vector<double> potential,
                                     KineticScheme scheme)
    : scheme_(scheme), potential_(std::move(potential)) {
  const std::size_t n = potential_.size();
  if (kinetic_row.size() != n) throw ParameterError("hamiltonian: kinetic row / potential size mismatch");
  for (std::size_t d = 1; d < n; ++d) {
    if (kinetic_row[d] != kinetic_row[n - d]) throw ParameterError("hamiltonian: kinetic row not symmetric");
  }
  row_.resize(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) row_[i] = kinetic_row[i % n];
}

double HamiltonianMatrix::operator()(std::size_t i, std::size_t j) const {
  const std::size_t n = size();
  const double k = row_[(i + n - j) % n];
  return i == j ? k + potential_[i] : k;
}

void HamiltonianMatrix::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) throw ParameterError("hamiltonian apply: size mismatch");
  if (scheme_ == KineticScheme::three_point) {
    const double c0 = row_[0];
    const double c1 = row_[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double left = x[(i + n - 1) % n];
      const double right = x[(i + 1) % n];
      y[i] = (c0 + potential_[i]) * x[i] + c1 * (left + right);
    }
    return;
  }
  // y_i = sum_j c((i - j) mod n) x_j, with c symmetric: a contiguous dot
  // against the doubled row starting at n - i.
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> r(row_.data() + (n - i) % n, n);
    y[i] = kernels::dot(r, x) + potential_[i] * x[i];
  }
}

void HamiltonianMatrix::apply(std::span<const std::complex<double>> x,
                              std::span<std::complex<double>> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) throw ParameterError("hamiltonian apply: size mismatch");
  std::vector<double> re(n), im(n), yre(n), yim(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  apply(re, yre);
  apply(im, yim);
  for (std::size_t i = 0; i < n; ++i) y[i] = {yre[i], yim[i]};
}

Matrix HamiltonianMatrix::to_dense() const {
  const std::size_t n = size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = (*this)(i, j);
  }
  return m;
}

HamiltonianMatrix build_hamiltonian(const Potential& potential, const Grid& grid, KineticScheme scheme) {
  const std::size_t n = grid.size();
  if (potential.values.size() != n) throw ParameterError("build_hamiltonian: potential and grid sizes differ");
  std::vector<double> row(n, 0.0);
  if (scheme == KineticScheme::three_point) {
    const double h = grid.spacing();
    row[0] = 2.0 * kKinetic / (h * h);
    row[1] = -kKinetic / (h * h);
    row[n - 1] = row[1];
  } else {
    // Periodic spectral second derivative: c(d) = (1/N) sum_m kappa k_m^2 cos(k_m u_d),
    // m in [-N/2, N/2). Phases reduced exactly in integers.
    const auto nn = static_cast<std::ptrdiff_t>(n);
    for (std::size_t d = 0; d <= n / 2; ++d) {
      double s = 0.0;
      for (std::ptrdiff_t m = -nn / 2; m < nn - nn / 2; ++m) {
        const double k = grid.wavevector(m);
        const std::ptrdiff_t ph = (m * static_cast<std::ptrdiff_t>(d)) % nn;
        s += kKinetic * k * k * std::cos(2.0 * kPi * static_cast<double>(ph) / static_cast<double>(n));
      }
      row[d] = s / static_cast<double>(n);
      if (d > 0) row[n - d] = row[d];
    }
  }
  return HamiltonianMatrix(std::move(row), potential.values, scheme);
}

LatticeModel::LatticeModel(const LatticeParams& p, const PhysicalConstants& c)
    : params(p),
      units(c, p.wavelength_m),
      grid((p.validate(), p.sites), p.points_per_site),
      depth(trap_depth(p.polarization_angle, p.depth_at_zero)),
      displacement(displacement_from_angle(p.polarization_angle)),
      trap(trap_frequency(p.polarization_angle, p.depth_at_zero, units)) {}

}  // namespace qslab
