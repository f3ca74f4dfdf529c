// qslab: quantum speed limit sweeps for an atom in a spin-dependent lattice.
//
//   qslab scan   [--config FILE] [--out DIR] [--seed S] [--estimator exact|experiment]
//   qslab point  --n N --dx DX [--out DIR]
//   qslab bands  [--depth U0] [--bands B] [--q-points Q] [--out DIR]
//   qslab qubit  --zeta Z [--omega W]
//   qslab report --out DIR

#include <CLI11.hpp>

#include <cmath>
#include <iostream>

#include "qslab/error.hpp"
#include "qslab/scan.hpp"

using namespace qslab;

namespace {

struct LatticeFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  std::string estimator = "exact";
  int workers = 0;
  int sites = 0;
  int points_per_site = 0;
  double depth = 0.0;
  double wavelength_nm = 0.0;
  std::size_t time_points = 0;
  int theory_points = -1;
  double light_shift = 0.0;
  bool light_shift_preset = false;
  bool no_monitor = false;
};

void add_lattice_flags(CLI::App* app, LatticeFlags& f) {
  app->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "RNG seed for simulated detection");
  app->add_option("--estimator", f.estimator, "exact | experiment")->check(CLI::IsMember({"exact", "experiment"}));
  app->add_option("--workers", f.workers, "worker threads (0: all cores)");
  app->add_option("--sites", f.sites, "lattice sites (odd)");
  app->add_option("--points-per-site", f.points_per_site, "grid points per site (power of two)");
  app->add_option("--depth", f.depth, "trap depth U0(0) in E_R");
  app->add_option("--wavelength-nm", f.wavelength_nm, "lattice wavelength in nm");
  app->add_option("--time-points", f.time_points, "time samples per trace");
  app->add_option("--theory-points", f.theory_points, "theory samples per n-series");
  app->add_option("--light-shift", f.light_shift, "differential light-shift slope, rad/us");
  app->add_flag("--measured-light-shift", f.light_shift_preset, "use the measured 81 rad/us slope");
  app->add_flag("--no-leakage-monitor", f.no_monitor, "skip the edge-site probability check");
}

ScanConfig make_config(CLI::App* app, const LatticeFlags& f) {
  ScanConfig c = f.config.empty() ? ScanConfig{} : load_config(f.config);
  if (app->count("--out")) c.output_dir = f.out;
  if (app->count("--seed")) c.seed = f.seed;
  if (app->count("--estimator")) c.estimator = parse_estimator(f.estimator);
  if (app->count("--workers")) c.workers = f.workers;
  if (app->count("--sites")) c.lattice.sites = f.sites;
  if (app->count("--points-per-site")) c.lattice.points_per_site = f.points_per_site;
  if (app->count("--depth")) c.lattice.depth_at_zero = f.depth;
  if (app->count("--wavelength-nm")) c.lattice.wavelength_m = f.wavelength_nm * 1e-9;
  if (app->count("--time-points")) c.time_points = f.time_points;
  if (app->count("--theory-points")) c.theory_points = f.theory_points;
  if (app->count("--light-shift")) c.ramsey.light_shift_slope = f.light_shift;
  if (f.light_shift_preset) c.ramsey.light_shift_slope = RamseyConfig::kMeasuredLightShift;
  if (f.no_monitor) c.leakage_monitor = false;
  c.validate();
  return c;
}

void print_point(const PointResult& r) {
  if (r.error) {
    std::cout << point_directory(r.point) << "  FAILED: " << *r.error << "\n";
    return;
  }
  const auto& q = *r.report;
  std::cout << point_directory(r.point) << "  E=" << num(q.E) << "  dE=" << num(q.dE) << "  regime="
            << name(q.regime) << "  xi=" << (q.xi_spectral ? num(*q.xi_spectral) : "-")
            << "  margin=" << num(q.min_margin) << (r.violates_bounds() ? "  VIOLATION" : "") << "\n";
}

int run_scan_verb(CLI::App* app, const LatticeFlags& f) {
  const ScanConfig cfg = make_config(app, f);
  const ScanResult res = run_scan(cfg);
  write_scan(res, cfg);
  for (const auto& r : res.points) print_point(r);
  std::cout << res.points.size() << " points, " << res.failures << " failures, " << res.violations
            << " bound violations; output in " << cfg.output_dir.string() << "\n";
  return res.failures == 0 && res.violations == 0 ? 0 : 1;
}

int run_point_verb(CLI::App* app, const LatticeFlags& f, int n, double dx) {
  ScanConfig cfg = make_config(app, f);
  cfg.points = {{n, dx}};
  cfg.default_points = false;
  cfg.validate();
  const PointResult r = run_point(cfg, cfg.points.front());
  const Units units(PhysicalConstants::cesium133(), cfg.lattice.wavelength_m);
  std::cout << point_report_json(r, units, cfg.estimator).dump(2) << "\n";
  if (app->count("--out")) {
    ScanResult res;
    res.points = {r};
    res.failures = r.error ? 1 : 0;
    res.violations = r.violates_bounds() ? 1 : 0;
    cfg.theory_points = 0;
    write_scan(res, cfg);
  }
  return !r.error && !r.violates_bounds() ? 0 : 1;
}

int run_bands_verb(double depth, int bands, int q_points, int sites, int points, const std::string& out) {
  const Units units(PhysicalConstants::cesium133(), 866e-9);
  const auto bs = band_structure(depth, bands, q_points, points / 2);
  std::cout << "band  width_Er  tunneling_time_s\n";
  for (const auto& b : bs) {
    std::cout << b.band_index << "  " << num(b.bandwidth) << "  " << num(units.time_unit_s() * tunneling_time(b.bandwidth))
              << "\n";
  }
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const BlochSpectrum spec(depth, 0.0, sites, points);
    std::vector<double> e(spec.energies().begin(), spec.energies().end());
    std::sort(e.begin(), e.end());
    write_file_atomic(std::filesystem::path(out) / "energies.csv", energies_csv(e));
    write_file_atomic(std::filesystem::path(out) / "bands.csv", bands_csv(bs));
  }
  return 0;
}

int run_qubit_verb(double zeta, double omega, std::size_t points) {
  const QubitModel q = qubit_model(zeta, omega);
  Json j;
  j["zeta"] = q.zeta;
  j["omega_Er"] = q.omega;
  j["e_Er"] = q.E;
  j["de_Er"] = q.dE;
  j["de_max_Er"] = q.dE_max;
  j["xi"] = q.xi ? Json(*q.xi) : Json(nullptr);
  j["regime"] = std::string(name(classify(q.E, q.dE)));
  j["stationary"] = q.stationary;
  std::cout << j.dump(2) << "\n";
  if (q.stationary) return 0;
  CsvWriter w({"t", "abs_A", "mt_bound", "ml_bound"});
  for (double t : uniform_times(mt_time(q.dE), points)) {
    const Bound a = mt_bound(q.dE, t);
    const Bound b = ml_bound(q.E, t);
    w.row({num(t), num(q.overlap(t)), a.valid() ? num(a.value) : "", b.valid() ? num(b.value) : ""});
  }
  std::cout << w.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum speed limit sweeps for a lattice-trapped atom"};
  app.require_subcommand(1);

  LatticeFlags scan_flags;
  auto* scan = app.add_subcommand("scan", "full (n, dx) sweep");
  add_lattice_flags(scan, scan_flags);

  LatticeFlags point_flags;
  int n = 0;
  double dx = 0.0;
  auto* point = app.add_subcommand("point", "single (n, dx)");
  add_lattice_flags(point, point_flags);
  point->add_option("--n", n, "vibrational level 0..2")->required();
  point->add_option("--dx", dx, "displacement in lambda/2")->required();

  double depth = 270.0;
  int bands = 11, q_points = 64, sites = 33, pps = 64;
  std::string bands_out;
  auto* bcmd = app.add_subcommand("bands", "band widths and tunneling times");
  bcmd->add_option("--depth", depth, "trap depth in E_R");
  bcmd->add_option("--bands", bands, "number of bands");
  bcmd->add_option("--q-points", q_points, "quasimomentum samples");
  bcmd->add_option("--sites", sites, "sites for energies.csv");
  bcmd->add_option("--points-per-site", pps, "points per site");
  bcmd->add_option("--out", bands_out, "write energies.csv and bands.csv here");

  double zeta = 0.0, omega = 2.0 * std::sqrt(270.0);
  std::size_t qpoints = 16;
  auto* qcmd = app.add_subcommand("qubit", "two-level reference model");
  qcmd->add_option("--zeta", zeta, "rotation angle in rad")->required();
  qcmd->add_option("--omega", omega, "level splitting in E_R");
  qcmd->add_option("--time-points", qpoints, "samples on [0, tau_MT]");

  std::string report_dir;
  auto* rcmd = app.add_subcommand("report", "rebuild figure tables from a scan directory");
  rcmd->add_option("--out", report_dir, "scan output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*scan) return run_scan_verb(scan, scan_flags);
    if (*point) return run_point_verb(point, point_flags, n, dx);
    if (*bcmd) return run_bands_verb(depth, bands, q_points, sites, pps, bands_out);
    if (*qcmd) return run_qubit_verb(zeta, omega, qpoints);
    if (*rcmd) {
      std::cout << aggregate_reports(report_dir) << " reports aggregated\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
