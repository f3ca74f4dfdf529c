#pragma once

// Symmetric eigendecomposition, the Bloch-reduced lattice spectrum, isolated
// single-site levels and band structure.

#include <cstddef>
#include <span>
#include <vector>

#include "qslab/linalg.hpp"
#include "qslab/model.hpp"

namespace qslab {

struct DecompositionQuality {
  double max_residual = 0.0;       // max_k |A v_k - l_k v_k|_2 / |A|_2
  double max_orthogonality = 0.0;  // max_ij |<v_i|v_j> - delta_ij|
  bool ok() const { return max_residual <= 1e-9 && max_orthogonality <= 1e-10; }
  void merge(const DecompositionQuality& o);
};

struct EigenDecomposition {
  std::vector<double> energies;  // ascending
  Matrix modes;                  // row k pairs with energies[k]
  double ground_offset = 0.0;    // subtract to reference the lowest level to zero
  DecompositionQuality quality;

  std::span<const double> mode(std::size_t k) const { return modes.row(k); }
};

// Householder + implicit QL. Deterministic; throws NumericError on
// non-convergence. quality is filled in for every call.
EigenDecomposition decompose(const Matrix& symmetric);
EigenDecomposition decompose(const HamiltonianMatrix& h);
DecompositionQuality check_decomposition(const Matrix& a, std::span<const double> energies,
                                         const Matrix& modes);

// Spectrum of -depth cos^2(pi (u - offset)) on S periodic sites in the
// plane-wave basis of the N = S P grid. Fourier modes m = j + S l with
// j in [0, S) and l in [-P/2, P/2) form S independent real symmetric
// tridiagonal blocks (gauge basis exp(-2 pi i offset l)|l>), so mode
// k = j P + b is band b at quasimomentum 2 pi j / S.
class BlochSpectrum {
 public:
  BlochSpectrum(double depth, double offset, int sites, int points_per_site);

  int sites() const { return sites_; }
  int points_per_site() const { return points_; }
  std::size_t size() const { return energies_.size(); }
  double depth() const { return depth_; }
  double offset() const { return offset_; }

  double energy(std::size_t k) const { return energies_[k]; }
  std::span<const double> energies() const { return energies_; }
  int block(std::size_t k) const { return static_cast<int>(k / points_); }
  int band(std::size_t k) const { return static_cast<int>(k % points_); }
  // Gauge-basis coefficients of mode k, indexed by l + P/2.
  std::span<const double> vector(std::size_t k) const {
    return vectors_[k / points_].row(k % points_);
  }
  // Fourier mode index m of block j, entry l + P/2.
  std::ptrdiff_t fourier_mode(int j, int entry) const {
    return j + static_cast<std::ptrdiff_t>(sites_) * (entry - points_ / 2);
  }
  double ground_energy() const { return ground_; }
  double band_center(int band) const;
  const DecompositionQuality& quality() const { return quality_; }

 private:
  double depth_;
  double offset_;
  int sites_;
  int points_;
  std::vector<double> energies_;
  std::vector<Matrix> vectors_;
  double ground_;
  DecompositionQuality quality_;
};

struct SingleSiteStates {
  std::vector<double> energies;  // absolute, E_R
  Matrix values;                 // row n: real wavefunction on u_r = (r - P/2)/P, unit 2-norm
  std::vector<double> positions; // u_r
  int bound_levels;              // levels below the potential maximum
};

// Lowest `count` levels of one isolated site of U_down with periodic closure.
SingleSiteStates single_site_eigenstates(const LatticeParams& params, int count);

struct BandStructure {
  int band_index;
  std::vector<double> quasimomentum;  // in (-pi, pi] per lattice constant
  std::vector<double> energies;       // E_R
  double bandwidth;                   // max - min, resolved in extended precision
};

// Bands of -depth cos^2(pi u) from the Bloch operator with plane waves
// |l| <= cutoff. Solved in long double: the lowest bandwidths at U0 ~ 270 E_R
// are ~1e-12 E_R, below double rounding of the band energies.
std::vector<BandStructure> band_structure(double depth, int n_bands, int q_points, int cutoff = 32);
std::vector<BandStructure> band_structure(const LatticeParams& params, int n_bands, int q_points);

// 2 pi hbar / bandwidth, in hbar/E_R.
double tunneling_time(double bandwidth);

}  // namespace qslab
