#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "qslab/config.hpp"
#include "qslab/dynamics.hpp"
#include "qslab/error.hpp"
#include "qslab/qsl.hpp"

using namespace qslab;

namespace {

struct Setup {
  LatticeModel model;
  BlochSpectrum spectrum;
  PreparedState prepared;
  SpectralState spectral;
  SpectralMoments m;
};

LatticeParams params_for(int n, double dx) {
  LatticeParams p;
  p.vibrational_index = n;
  p.polarization_angle = angle_from_displacement(dx);
  return p;
}

Setup setup(int n, double dx, InitialShape shape = InitialShape::wannier) {
  LatticeModel model(params_for(n, dx));
  BlochSpectrum spectrum(model.depth, 0.0, model.params.sites, model.params.points_per_site);
  REQUIRE(spectrum.quality().ok());
  PreparedState prepared = prepare_initial(n, dx, model, spectrum, shape);
  SpectralState spectral = to_spectral(prepared.state, spectrum);
  SpectralMoments m = moments(spectral);
  return {std::move(model), std::move(spectrum), std::move(prepared), std::move(spectral), m};
}

double omega_eff(const BlochSpectrum& s) { return s.band_center(1) - s.band_center(0); }

std::vector<double> poisson(double x, std::size_t count) {
  std::vector<double> p(count);
  for (std::size_t k = 0; k < count; ++k) p[k] = std::exp(-x + k * std::log(x) - std::lgamma(k + 1.0));
  return p;
}

}  // namespace

TEST_CASE("undisplaced state is the band level") {
  for (int n = 0; n < 3; ++n) {
    CAPTURE(n);
    const auto s = setup(n, 0.0);
    const auto bands = s.spectral.band_populations(s.spectrum.points_per_site());
    CHECK(std::abs(bands[n] - 1.0) < 1e-10);
    CHECK(s.m.stationary);
    CHECK_FALSE(s.m.kurtosis.has_value());
    CHECK(s.m.mean == doctest::Approx(s.spectrum.band_center(n) - s.spectrum.ground_energy()).epsilon(1e-10));
    CHECK(s.m.uncertainty < kStationaryWidth);
    CHECK(std::abs(s.prepared.state.norm() - 1.0) < 1e-12);
  }
  const auto g = setup(0, 0.0);
  CHECK(std::abs(g.m.mean) < 1e-9);
}

TEST_CASE("zero-padded level overlaps the isolated site state") {
  LatticeParams p;
  const auto levels = single_site_eigenstates(p, 3);
  for (int n = 0; n < 3; ++n) {
    const auto s = setup(n, 0.0, InitialShape::zero_padded);
    const auto& grid = s.prepared.state.grid;
    cplx overlap = 0.0;
    for (int r = 0; r < p.points_per_site; ++r) {
      const std::size_t i = grid.wrap(static_cast<std::ptrdiff_t>(grid.home_site()) * p.points_per_site + r -
                                      p.points_per_site / 2);
      overlap += levels.values(n, r) * s.prepared.state.amplitudes[i];
    }
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-10);
  }
}

TEST_CASE("coherent state at small displacement") {
  const auto s = setup(0, 0.04);
  const double w = omega_eff(s.spectrum);
  const double x = w * kPi * kPi * 0.04 * 0.04 / 4.0;  // |alpha|^2
  const auto bands = s.spectral.band_populations(s.spectrum.points_per_site());
  const auto ref = poisson(x, bands.size());
  double tv = 0.0;
  for (std::size_t b = 0; b < bands.size(); ++b) tv += 0.5 * std::abs(bands[b] - ref[b]);
  CHECK(tv <= 0.02);
  CHECK(bands[1] / bands[0] == doctest::Approx(0.13).epsilon(0.08));
  CHECK(std::abs(s.m.mean / (w * x) - 1.0) < 0.03);
  CHECK(std::abs(s.m.uncertainty / (w * std::sqrt(x)) - 1.0) < 0.03);
  CHECK(std::sqrt(x) == doctest::Approx(0.36).epsilon(0.03));

  const auto trace = evolve_overlap(s.spectral, uniform_times(2 * kPi / w, 2001));
  double lowest = 1.0;
  for (std::size_t i = 0; i < trace.size(); ++i) lowest = std::min(lowest, trace.abs(i));
  CHECK(std::abs(lowest - std::cos(40.0 * kPi / 180.0)) < 0.05);
  CHECK(lowest == doctest::Approx(std::exp(-2 * x)).epsilon(0.01));
}

TEST_CASE("spectral weights sum to one over the default grid") {
  for (const auto& pt : default_grid()) {
    CAPTURE(pt.n);
    CAPTURE(pt.dx);
    const auto s = setup(pt.n, pt.dx);
    const auto pop = s.spectral.populations();
    CHECK(std::abs(std::accumulate(pop.begin(), pop.end(), 0.0) - 1.0) < 1e-10);
    CHECK(s.spectral.leakage <= 1e-8);
    CHECK(s.m.uncertainty >= 0.0);
    CHECK(s.m.mean >= 0.0);
    REQUIRE(s.m.kurtosis.has_value());
    CHECK(*s.m.kurtosis >= 1.0);
    CHECK(s.m.cutoff >= s.m.mean);
    CHECK(std::abs(s.prepared.state.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("eigenmode projects onto itself") {
  const auto s = setup(0, 0.1);
  for (std::size_t j : {0u, 5u, 64u + 2u, 700u}) {
    SpectralState unit = s.spectral;
    std::fill(unit.coefficients.begin(), unit.coefficients.end(), cplx(0.0));
    unit.coefficients[j] = 1.0;
    const auto psi = reconstruct(unit, s.spectrum, 0.0);
    const auto back = to_spectral(psi, s.spectrum);
    for (std::size_t k = 0; k < back.coefficients.size(); ++k) {
      CHECK(std::abs(back.coefficients[k] - (k == j ? cplx(1.0) : cplx(0.0))) < 1e-12);
    }
  }
}

TEST_CASE("moments of simple spectra") {
  SUBCASE("two-level equal superposition") {
    const std::vector<double> p{0.5, 0.5}, e{0.0, 3.0};
    const auto m = moments(p, e);
    CHECK(m.mean == doctest::Approx(1.5));
    CHECK(m.uncertainty == doctest::Approx(1.5));
    CHECK(*m.kurtosis == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(deviation_from_kurtosis(*m.kurtosis) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(m.cutoff == 3.0);
  }
  SUBCASE("single level is stationary") {
    const std::vector<double> p{1.0}, e{2.0};
    const auto m = moments(p, e);
    CHECK(m.stationary);
    CHECK(m.mean == 2.0);
    CHECK_FALSE(m.kurtosis.has_value());
  }
  SUBCASE("mismatched sizes") {
    const std::vector<double> p{1.0}, e{2.0, 3.0};
    CHECK_THROWS_AS(moments(p, e), ParameterError);
  }
}

TEST_CASE("overlap of a two-level state") {
  for (double zeta : {0.2, 1.0, kPi / 2, 2.5}) {
    const double w = 5.0;
    const double p0 = std::pow(std::cos(zeta / 2), 2), p1 = std::pow(std::sin(zeta / 2), 2);
    const std::vector<double> pop{p0, p1}, e{0.0, w};
    const auto times = uniform_times(3.0, 50);
    const auto tr = evolve_overlap(pop, e, times);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double t = times[i];
      const double oracle = std::sqrt(1.0 - std::sin(zeta) * std::sin(zeta) * std::pow(std::sin(w * t / 2), 2));
      CHECK(std::abs(tr.abs(i) - oracle) < 1e-12);
    }
    CHECK(tr.overlaps[0] == cplx(1.0));
    CHECK(tr.fs_distance(0) == 0.0);
  }
}

TEST_CASE("overlap symmetry and bounds") {
  const auto s = setup(1, 0.2);
  const auto times = uniform_times(mt_time(s.m.uncertainty) * 3, 128);
  const auto fwd = evolve_overlap(s.spectral, times);
  const auto pop = s.spectral.populations();
  std::vector<double> neg(s.spectral.energies.size());
  std::transform(s.spectral.energies.begin(), s.spectral.energies.end(), neg.begin(), [](double e) { return -e; });
  const auto rev = evolve_overlap(pop, neg, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(fwd.abs(i) <= 1.0 + 1e-10);
    CHECK(std::abs(fwd.abs(i) - rev.abs(i)) < 1e-13);
    CHECK(std::abs(fwd.overlaps[i] - std::conj(rev.overlaps[i])) < 1e-13);
    CHECK(fwd.fs_distance(i) == doctest::Approx(std::acos(std::min(1.0, fwd.abs(i)))));
  }
  const std::vector<double> bad{0.1, 0.2};
  CHECK_THROWS_AS(evolve_overlap(s.spectral, bad), ParameterError);
  const std::vector<double> unsorted{0.0, 0.2, 0.1};
  CHECK_THROWS_AS(evolve_overlap(s.spectral, unsorted), ParameterError);
}

TEST_CASE("reconstructed state reproduces the overlap and stays normalized") {
  const auto s = setup(1, 0.2);
  const auto times = std::vector<double>{0.0, 0.01, 0.05, 0.2, 1.0};
  const auto tr = evolve_overlap(s.spectral, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto psi = reconstruct(s.spectral, s.spectrum, times[i]);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
    CHECK(std::abs(s.prepared.state.inner(psi) - tr.overlaps[i]) < 1e-9);
  }
}

TEST_CASE("lab frame and co-moving frame agree") {
  for (const auto& pt : std::vector<ScanPoint>{{0, 0.08}, {1, 0.25}, {2, 0.5}}) {
    CAPTURE(pt.n);
    CAPTURE(pt.dx);
    const auto moving = setup(pt.n, pt.dx);
    // Lab frame: packet at rest on the down lattice, up lattice displaced by +dx.
    const auto rest = prepare_initial(pt.n, 0.0, moving.model, moving.spectrum);
    const BlochSpectrum up(moving.model.depth, pt.dx, moving.model.params.sites, moving.model.params.points_per_site);
    const auto lab = to_spectral(rest.state, up);
    const auto pl = lab.populations(), pm = moving.spectral.populations();
    double worst = 0.0;
    for (std::size_t k = 0; k < pl.size(); ++k) worst = std::max(worst, std::abs(pl[k] - pm[k]));
    CHECK(worst < 1e-10);
    const auto ml = moments(lab);
    CHECK(ml.mean == doctest::Approx(moving.m.mean).epsilon(1e-10));
    CHECK(ml.uncertainty == doctest::Approx(moving.m.uncertainty).epsilon(1e-10));
  }
}

TEST_CASE("moments without diagonalization") {
  for (const auto& pt : std::vector<ScanPoint>{{0, 0.04}, {0, 0.16}, {1, 0.12}, {2, 0.5}}) {
    CAPTURE(pt.n);
    CAPTURE(pt.dx);
    const auto s = setup(pt.n, pt.dx);
    const auto& grid = s.prepared.state.grid;
    const auto h = build_hamiltonian(lattice_potential(grid, s.model.depth, 0.0, Spin::down), grid,
                                     KineticScheme::spectral);
    const auto d = direct_moments(s.prepared.state, h, s.spectrum.ground_energy());
    CHECK(std::abs(d.mean / s.m.mean - 1.0) < 1e-8);
    CHECK(std::abs(d.uncertainty / s.m.uncertainty - 1.0) < 1e-8);
    REQUIRE(d.kurtosis.has_value());
    CHECK(std::abs(*d.kurtosis / *s.m.kurtosis - 1.0) < 1e-6);
  }
  const auto g = setup(0, 0.0);
  const auto& grid = g.prepared.state.grid;
  const auto h = build_hamiltonian(lattice_potential(grid, g.model.depth, 0.0, Spin::down), grid,
                                   KineticScheme::spectral);
  const auto d = direct_moments(g.prepared.state, h, g.spectrum.ground_energy());
  CHECK(std::abs(d.mean) < 1e-9);
  CHECK(d.stationary);
}

TEST_CASE("plane wave is an eigenstate of the free three-point operator") {
  const Grid g(5, 16);
  const auto h = build_hamiltonian(lattice_potential(g, 0.0, 0.0, Spin::down), g, KineticScheme::three_point);
  const std::ptrdiff_t m = 7;
  QuantumState psi{g, std::vector<cplx>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    psi.amplitudes[i] = std::polar(1.0 / std::sqrt(double(g.size())), g.wavevector(m) * g.position(i));
  }
  const auto d = direct_moments(psi, h, 0.0);
  const double hh = g.spacing();
  const double oracle = 2 * kKinetic * (1 - std::cos(g.wavevector(m) * hh)) / (hh * hh);
  CHECK(d.mean == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(d.uncertainty < 1e-6);
}

TEST_CASE("probability stays away from the box edges") {
  for (int n = 0; n < 3; ++n) {
    const auto s = setup(n, 0.5);
    const auto t = uniform_times(std::max(mt_time(s.m.uncertainty), ml_time(s.m.mean)), 64);
    CHECK(max_edge_probability(s.spectral, s.spectrum, t) < 1e-6);
    CHECK(s.prepared.state.edge_probability() < 1e-6);
  }
}

TEST_CASE("zero-padded and Wannier packets share their low moments") {
  for (const auto& pt : std::vector<ScanPoint>{{0, 0.08}, {1, 0.2}, {2, 0.5}}) {
    CAPTURE(pt.n);
    CAPTURE(pt.dx);
    const auto w = setup(pt.n, pt.dx);
    const auto z = setup(pt.n, pt.dx, InitialShape::zero_padded);
    // The two packets differ in their tails (~1e-7 amplitude at the site edge).
    CHECK(std::abs(z.m.mean / w.m.mean - 1.0) < 5e-6);
    CHECK(std::abs(z.m.uncertainty / w.m.uncertainty - 1.0) < 5e-6);
  }
}

TEST_CASE("initial state preconditions") {
  const LatticeModel model(params_for(0, 0.1));
  const BlochSpectrum down(model.depth, 0.0, model.params.sites, model.params.points_per_site);
  CHECK_THROWS_AS(prepare_initial(3, 0.1, model, down), ParameterError);
  CHECK_THROWS_AS(prepare_initial(0, 0.6, model, down), ParameterError);
  CHECK_THROWS_AS(prepare_initial(0, -0.1, model, down), ParameterError);
  const BlochSpectrum wrong(model.depth, 0.0, 3, 64);
  CHECK_THROWS_AS(prepare_initial(0, 0.1, model, wrong), ParameterError);
  CHECK(prepare_initial(0, 0.1, model, down).warnings.empty());
}
