#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "qslab/eigensolve.hpp"
#include "qslab/error.hpp"
#include "qslab/io.hpp"
#include "qslab/model.hpp"

using namespace qslab;

namespace {

Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = d(rng);
  }
  return a;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  }
  return m;
}

int sign_changes(std::span<const double> v, double floor) {
  int changes = 0;
  double last = 0.0;
  for (double x : v) {
    if (std::abs(x) < floor) continue;
    if (last != 0.0 && (x > 0) != (last > 0)) ++changes;
    last = x;
  }
  return changes;
}

}  // namespace

TEST_CASE("two by two exchange matrix") {
  Matrix a(2, 2);
  a(0, 1) = a(1, 0) = 1.0;
  const auto d = decompose(a);
  CHECK(d.quality.ok());
  CHECK(d.energies[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(d.energies[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(d.mode(0)[0]) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(d.ground_offset == d.energies[0]);
}

TEST_CASE("diagonal matrix") {
  Matrix a(4, 4);
  const double vals[] = {3.0, -1.0, 2.0, 0.5};
  for (int i = 0; i < 4; ++i) a(i, i) = vals[i];
  const auto d = decompose(a);
  CHECK(d.quality.ok());
  CHECK(d.energies == std::vector<double>{-1.0, 0.5, 2.0, 3.0});
  const int origin[] = {1, 3, 2, 0};
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 4; ++i) CHECK(d.mode(k)[i] == (i == origin[k] ? 1.0 : 0.0));
  }
}

TEST_CASE("random symmetric matrices against Eigen") {
  for (std::size_t n : {1u, 2u, 3u, 17u, 64u, 150u}) {
    CAPTURE(n);
    const auto a = random_symmetric(n, 100 + n);
    const auto d = decompose(a);
    CHECK(d.quality.ok());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
    const double scale = ref.eigenvalues().cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(d.energies[k] - ref.eigenvalues()(k)) <= 1e-12 * scale);
      // Random spectra are non-degenerate, so vectors agree up to sign.
      double overlap = 0.0;
      for (std::size_t i = 0; i < n; ++i) overlap += d.mode(k)[i] * ref.eigenvectors()(i, k);
      CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-10);
    }
    for (std::size_t k = 1; k < n; ++k) CHECK(d.energies[k - 1] <= d.energies[k]);
  }
}

TEST_CASE("decomposition is bit-identical across runs") {
  const auto a = random_symmetric(80, 5);
  const auto d1 = decompose(a);
  const auto d2 = decompose(a);
  CHECK(d1.energies == d2.energies);
  CHECK(std::equal(d1.modes.data().begin(), d1.modes.data().end(), d2.modes.data().begin()));
}

TEST_CASE("invalid input") {
  Matrix a(3, 3);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(decompose(a), ParameterError);
  CHECK_THROWS_AS(decompose(Matrix(2, 3)), ParameterError);
  Matrix b = random_symmetric(5, 1);
  b(2, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(decompose(b), NumericError);
}

TEST_CASE("lattice hamiltonian against Eigen and the Bloch spectrum") {
  const int sites = 3, points = 32;
  const Grid g(sites, points);
  for (double offset : {0.0, 0.3}) {
    CAPTURE(offset);
    const auto h = build_hamiltonian(lattice_potential(g, 270.0, offset, Spin::up), g, KineticScheme::spectral);
    const auto d = decompose(h);
    CHECK(d.quality.ok());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(h.to_dense()), Eigen::EigenvaluesOnly);
    const double scale = ref.eigenvalues().cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(d.energies[k] - ref.eigenvalues()(k)) <= 1e-12 * scale);

    const BlochSpectrum bloch(270.0, offset, sites, points);
    CHECK(bloch.quality().ok());
    std::vector<double> e(bloch.energies().begin(), bloch.energies().end());
    std::sort(e.begin(), e.end());
    // The collocation operator aliases at the Nyquist mode; low levels agree.
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(e[k] - d.energies[k]) < 1e-8);
    CHECK(bloch.ground_energy() == e[0]);
    for (double x : d.energies) CHECK(x >= -270.0);
  }
}

TEST_CASE("bloch spectrum structure") {
  const BlochSpectrum a(270.0, 0.0, 33, 64), b(270.0, 0.37, 33, 64);
  CHECK(a.quality().ok());
  CHECK(a.size() == 2112);
  // The gauge basis makes the blocks independent of the lattice offset.
  CHECK(std::equal(a.energies().begin(), a.energies().end(), b.energies().begin()));
  CHECK(a.block(64 * 5 + 3) == 5);
  CHECK(a.band(64 * 5 + 3) == 3);
  CHECK(a.fourier_mode(2, 32) == 2);
  CHECK(a.fourier_mode(2, 0) == 2 - 33 * 32);
  for (int j = 0; j < 33; ++j) {
    for (int band = 1; band < 64; ++band) CHECK(a.energy(j * 64 + band - 1) <= a.energy(j * 64 + band));
  }
  CHECK(a.band_center(0) == doctest::Approx(a.ground_energy()).epsilon(1e-13));
  CHECK_THROWS_AS(a.band_center(64), ParameterError);
  CHECK_THROWS_AS(BlochSpectrum(-1.0, 0.0, 3, 8), ParameterError);
  CHECK_THROWS_AS(BlochSpectrum(1.0, 0.0, 3, 7), ParameterError);
}

TEST_CASE("bloch spectrum converges under grid refinement") {
  const BlochSpectrum a(270.0, 0.0, 33, 64), b(270.0, 0.0, 33, 128);
  CHECK(b.quality().ok());
  std::vector<double> ea(a.energies().begin(), a.energies().end());
  std::vector<double> eb(b.energies().begin(), b.energies().end());
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  for (std::size_t k = 0; k < 40; ++k) CHECK(std::abs(ea[k] - eb[k]) / std::abs(eb[k]) < 1e-6);
}

TEST_CASE("single-site levels") {
  LatticeParams p;
  const auto s = single_site_eigenstates(p, 3);
  REQUIRE(s.values.rows() == 3);
  CHECK(s.bound_levels >= 8);
  CHECK(s.energies[0] == doctest::Approx(-253.8223).epsilon(1e-6));
  CHECK(s.energies[1] == doctest::Approx(-221.9921).epsilon(1e-6));

  for (int n = 0; n < 3; ++n) {
    CAPTURE(n);
    CHECK(sign_changes(s.values.row(n), 1e-6) == n);
    // Reflection about the site centre u = 0 (index P/2): parity (-1)^n.
    const std::size_t c = 32;
    for (std::size_t r = 1; r < 32; ++r) {
      const double plus = s.values(n, c + r), minus = s.values(n, c - r);
      CHECK(std::abs(plus - (n % 2 ? -minus : minus)) < 1e-10);
    }
  }
  CHECK(s.values(0, 32) > 0);
  CHECK(s.values(1, 33) > s.values(1, 31));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(kernels::dot(s.values.row(i), s.values.row(j)) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(single_site_eigenstates(p, s.bound_levels + 1), ParameterError);
  CHECK_THROWS_AS(single_site_eigenstates(p, 0), ParameterError);
}

TEST_CASE("empty lattice folds the free dispersion") {
  const int q_points = 16, n_bands = 5;
  const auto bands = band_structure(0.0, n_bands, q_points);
  CHECK(bands[0].bandwidth == doctest::Approx(1.0).epsilon(1e-14));
  for (int iq = 0; iq < q_points; ++iq) {
    const double q = bands[0].quasimomentum[iq];
    std::vector<double> folded;
    for (int l = -4; l <= 4; ++l) folded.push_back(kKinetic * (q + 2 * kPi * l) * (q + 2 * kPi * l));
    std::sort(folded.begin(), folded.end());
    for (int b = 0; b < n_bands; ++b) CHECK(bands[b].energies[iq] == doctest::Approx(folded[b]).epsilon(1e-13));
  }
}

TEST_CASE("deep lattice bands") {
  const auto bands = band_structure(LatticeParams{}, 11, 32);
  for (const auto& b : bands) {
    CHECK(b.bandwidth >= 0.0);
    CHECK(b.quasimomentum.front() > -kPi);
    CHECK(b.quasimomentum.back() == doctest::Approx(kPi));
  }
  for (std::size_t iq = 0; iq < 32; ++iq) {
    for (std::size_t b = 1; b < bands.size(); ++b) CHECK(bands[b - 1].energies[iq] < bands[b].energies[iq]);
  }
  for (std::size_t b = 1; b < bands.size(); ++b) CHECK(bands[b - 1].bandwidth < bands[b].bandwidth);

  // Deep-lattice asymptote of the lowest band: width 4J, J = (4/sqrt pi) s^(3/4) exp(-2 sqrt s).
  const double s = 270.0;
  const double asymptote = 16.0 / std::sqrt(kPi) * std::pow(s, 0.75) * std::exp(-2.0 * std::sqrt(s));
  CHECK(bands[0].bandwidth == doctest::Approx(asymptote).epsilon(0.05));

  const Units u(PhysicalConstants::cesium133(), 866e-9);
  const double tau0 = tunneling_time(bands[0].bandwidth) * u.time_unit_s();
  const double tau10 = tunneling_time(bands[10].bandwidth) * u.time_unit_s();
  CHECK(tau0 > 3.2e7);
  CHECK(std::log10(tau0 / tau10) >= 12.0);
  CHECK(tunneling_time(1.0) == doctest::Approx(2 * kPi));
  CHECK_THROWS_AS(band_structure(270.0, 0, 8), ParameterError);
  CHECK_THROWS_AS(band_structure(270.0, 2, 1), ParameterError);
}

TEST_CASE("spectrum dumps") {
  const std::vector<double> e{-1.5, 0.25};
  CHECK(energies_csv(e) == "index,energy_Er\n0,-1.5\n1,0.25\n");
  const auto bands = band_structure(0.0, 1, 2);
  const std::string csv = bands_csv(bands);
  CHECK(csv.rfind("band,q,energy_Er\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
