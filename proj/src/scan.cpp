#include "qslab/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "qslab/error.hpp"

namespace qslab {
namespace fs = std::filesystem;

namespace {

struct Pipeline {
  LatticeModel model;
  BlochSpectrum spectrum;
  PreparedState prepared;
  SpectralState spectral;
  StateSummary summary;
};

LatticeParams point_params(const LatticeParams& lattice, int n, double dx) {
  LatticeParams p = lattice;
  p.polarization_angle = angle_from_displacement(dx);
  p.vibrational_index = n;
  return p;
}

Pipeline build_pipeline(const LatticeParams& lattice, int n, double dx) {
  const LatticeParams p = point_params(lattice, n, dx);
  LatticeModel model(p);
  BlochSpectrum spectrum(model.depth, 0.0, p.sites, p.points_per_site);
  PreparedState prepared = prepare_initial(n, dx, model, spectrum);
  SpectralState spectral = to_spectral(prepared.state, spectrum);
  StateSummary s;
  s.n = n;
  s.dx = dx;
  s.theta = p.polarization_angle;
  s.depth = model.depth;
  s.omega = model.trap.energy;
  s.level = spectrum.band_center(n) - spectrum.ground_energy();
  s.moments = moments(spectral);
  return {std::move(model), std::move(spectrum), std::move(prepared), std::move(spectral), s};
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers) : std::max(1u, std::thread::hardware_concurrency());
  w = std::min(w, count);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (w <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < w; ++i) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

std::uint64_t point_seed(std::uint64_t seed, const ScanPoint& p) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(p.dx));
  std::memcpy(&bits, &p.dx, sizeof(bits));
  return stream_seed(seed, static_cast<std::uint64_t>(p.n), bits);
}

CurvePoint curve_point(double parameter, double E, double dE, double omega) {
  return {parameter, 4.0 * E / omega, 4.0 * dE / omega};
}

}  // namespace

StateSummary summarize_state(const LatticeParams& lattice, int n, double dx) {
  return build_pipeline(lattice, n, dx).summary;
}

bool PointResult::violates_bounds() const {
  if (!report || report->stationary) return false;
  return report->min_margin < -kMarginTolerance || report->mt_margin < -kMarginTolerance ||
         report->ml_margin < -kMarginTolerance;
}

PointResult run_point(const ScanConfig& cfg, const ScanPoint& point) {
  PointResult r;
  r.point = point;
  try {
    Pipeline p = build_pipeline(cfg.lattice, point.n, point.dx);
    r.summary = p.summary;
    r.quality = p.spectrum.quality();
    r.leakage = p.spectral.leakage;
    r.warnings = p.prepared.warnings;
    if (!r.quality.ok()) {
      throw NumericError("eigendecomposition outside residual/orthonormality bounds", r.quality.max_residual);
    }
    const SpectralMoments& m = p.summary.moments;
    if (m.stationary) {
      r.report = report(m, OverlapTrace{});
      r.warnings.push_back("stationary state: no bounds asserted");
      return r;
    }
    r.mt_trace = evolve_overlap(p.spectral, uniform_times(mt_time(m.uncertainty), cfg.time_points));
    r.ml_trace = evolve_overlap(p.spectral, uniform_times(ml_time(m.mean), cfg.time_points));
    r.report = report(m, r.mt_trace, &r.ml_trace);
    if (cfg.leakage_monitor) {
      r.edge_probability = std::max(max_edge_probability(p.spectral, p.spectrum, r.mt_trace.times),
                                    max_edge_probability(p.spectral, p.spectrum, r.ml_trace.times));
      if (r.edge_probability > 1e-6) {
        r.warnings.push_back("edge-site probability " + num(r.edge_probability) + " exceeds 1e-6");
      }
    }
    if (cfg.estimator == Estimator::experiment) {
      RamseyConfig rc = cfg.ramsey;
      rc.rng_seed = point_seed(cfg.seed, point);
      r.experiment = simulate_experiment(r.mt_trace, p.summary.level, r.report->tau_mt, rc,
                                         p.model.units.time_unit_us(), true);
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

ReferenceCurve coherent_reference_curve(double omega, std::span<const double> alphas) {
  ReferenceCurve c{"coherent", -1, {}};
  for (double a : alphas) {
    if (!(a > 0.0)) throw ParameterError("coherent curve: alpha must be positive");
    c.points.push_back(curve_point(a, omega * a * a, omega * a, omega));
  }
  return c;
}

ReferenceCurve qubit_reference_curve(double omega, std::span<const double> zetas) {
  ReferenceCurve c{"qubit", -1, {}};
  for (double z : zetas) {
    if (!(z > 0.0 && z <= kPi / 2.0)) throw ParameterError("qubit curve: zeta outside (0, pi/2]");
    const QubitModel q = qubit_model(z, omega);
    c.points.push_back(curve_point(z, q.E, q.dE, omega));
  }
  return c;
}

ScanResult run_scan(const ScanConfig& cfg) {
  cfg.validate();
  ScanResult out;
  out.points.resize(cfg.points.size());

  // Theory samples: log grid on [0.01, 0.5] per n plus every scan dx.
  std::map<int, std::vector<double>> series;
  for (int n = 0; n <= 2; ++n) {
    auto& xs = series[n];
    for (int i = 0; i < cfg.theory_points; ++i) {
      const double f = cfg.theory_points > 1 ? static_cast<double>(i) / (cfg.theory_points - 1) : 1.0;
      xs.push_back(0.01 * std::pow(50.0, f));
    }
    for (const auto& p : cfg.points) {
      if (p.n == n) xs.push_back(p.dx);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  std::vector<std::pair<int, double>> theory_tasks;
  for (const auto& [n, xs] : series) {
    for (double x : xs) theory_tasks.emplace_back(n, x);
  }
  std::vector<std::optional<StateSummary>> theory(theory_tasks.size());

  const std::size_t npoints = cfg.points.size();
  parallel_for(npoints + theory_tasks.size(), cfg.workers, [&](std::size_t i) {
    if (i < npoints) {
      out.points[i] = run_point(cfg, cfg.points[i]);
      return;
    }
    const auto [n, dx] = theory_tasks[i - npoints];
    try {
      theory[i - npoints] = summarize_state(cfg.lattice, n, dx);
    } catch (const std::exception&) {
      theory[i - npoints].reset();
    }
  });

  for (int n = 0; n <= 2; ++n) {
    ReferenceCurve c{"lattice_n" + std::to_string(n), n, {}};
    for (std::size_t t = 0; t < theory_tasks.size(); ++t) {
      if (theory_tasks[t].first != n || !theory[t] || theory[t]->moments.stationary) continue;
      const auto& s = *theory[t];
      c.points.push_back(curve_point(s.dx, s.moments.mean, s.moments.uncertainty, s.omega));
    }
    out.curves.push_back(std::move(c));
  }
  std::vector<double> alphas, zetas;
  for (int i = 1; i <= 60; ++i) alphas.push_back(0.05 * i);
  for (int i = 1; i <= 45; ++i) zetas.push_back(kPi / 2.0 * i / 45.0);
  const double omega = 2.0 * std::sqrt(cfg.lattice.depth_at_zero);
  out.curves.push_back(coherent_reference_curve(omega, alphas));
  out.curves.push_back(qubit_reference_curve(omega, zetas));

  for (const auto& r : out.points) {
    if (r.error) ++out.failures;
    if (r.violates_bounds()) ++out.violations;
    if (!r.report || r.report->stationary) continue;
    const CurvePoint mine = curve_point(r.point.dx, r.report->E, r.report->dE, r.summary.omega);
    const auto& curve = out.curves[static_cast<std::size_t>(r.point.n)].points;
    const auto hit = std::find_if(curve.begin(), curve.end(), [&](const CurvePoint& c) { return c.parameter == r.point.dx; });
    const double d = hit == curve.end() ? std::numeric_limits<double>::infinity()
                                        : std::max(std::abs(hit->inv_tau_ml - mine.inv_tau_ml),
                                                   std::abs(hit->inv_tau_mt - mine.inv_tau_mt));
    out.theory_mismatch = std::max(out.theory_mismatch, d);
  }
  return out;
}

std::string point_directory(const ScanPoint& p) { return "n" + std::to_string(p.n) + "_dx" + num(p.dx); }

Json point_report_json(const PointResult& r, const Units& units, Estimator estimator) {
  Json j = r.report ? report_json(*r.report, units) : Json::object();
  j["n"] = r.point.n;
  j["dx_halflambda"] = r.point.dx;
  j["theta_rad"] = r.summary.theta;
  j["depth_Er"] = r.summary.depth;
  j["hbar_omega_Er"] = r.summary.omega;
  j["level_Er"] = r.summary.level;
  j["beta2"] = r.summary.moments.kurtosis ? Json(*r.summary.moments.kurtosis) : Json(nullptr);
  j["cutoff_Er"] = r.summary.moments.cutoff;
  j["stationary"] = r.summary.moments.stationary;
  if (r.report && !r.report->stationary) {
    j["mt_margin"] = r.report->mt_margin;
    j["ml_margin"] = r.report->ml_margin;
    j["xi_fit_err"] = r.report->xi_fit_error;
    j["xi_harmonic"] = xi_harmonic(r.point.n, r.report->dE, r.summary.omega);
    j["bhatia_davis_cap"] = bhatia_davis_cap(r.report->E, r.report->dE, r.summary.moments.cutoff);
  }
  j["leakage"] = r.leakage;
  j["edge_probability"] = r.edge_probability;
  j["estimator"] = std::string(name(estimator));
  if (r.experiment) {
    j["e_hat_Er"] = r.experiment->mean_energy.value;
    j["e_hat_err_Er"] = r.experiment->mean_energy.error;
    j["de_hat_Er"] = r.experiment->uncertainty.value;
    j["de_hat_err_Er"] = r.experiment->uncertainty.error;
    j["xi_hat"] = r.experiment->xi ? Json(r.experiment->xi->xi) : Json(nullptr);
  }
  j["warnings"] = r.warnings;
  j["error"] = r.error ? Json(*r.error) : Json(nullptr);
  return j;
}

namespace {

std::string cell(const Bound& b) { return b.valid() ? num(b.value) : ""; }

std::string fig3_csv(const std::vector<Json>& reports) {
  CsvWriter w({"n", "dx", "inv_tau_ml", "inv_tau_mt", "regime"});
  for (const auto& j : reports) {
    if (j["stationary"].get<bool>() || j["e_Er"].is_null()) continue;
    const double omega = j["hbar_omega_Er"].get<double>();
    w.row({std::to_string(j["n"].get<int>()), num(j["dx_halflambda"].get<double>()),
           num(4.0 * j["e_Er"].get<double>() / omega), num(4.0 * j["de_Er"].get<double>() / omega),
           j["regime"].get<std::string>()});
  }
  return w.str();
}

std::string fig4_csv(const std::vector<Json>& reports) {
  CsvWriter w({"n", "dx", "de_over_hw", "xi_spectral", "xi_fit", "xi_fourth_root", "xi_harmonic", "nonharmonic",
               "de_hat_over_hw", "xi_hat"});
  for (const auto& j : reports) {
    if (j["stationary"].get<bool>() || j["xi_spectral"].is_null()) continue;
    const double omega = j["hbar_omega_Er"].get<double>();
    const double dx = j["dx_halflambda"].get<double>();
    const double xi = j["xi_spectral"].get<double>();
    const bool exp = j.contains("de_hat_Er");
    w.row({std::to_string(j["n"].get<int>()), num(dx), num(j["de_Er"].get<double>() / omega), num(xi),
           j["xi_fit"].is_null() ? "" : num(j["xi_fit"].get<double>()), num(std::pow(xi, 0.25)),
           num(j["xi_harmonic"].get<double>()), dx > 0.25 ? "1" : "0",
           exp ? num(j["de_hat_Er"].get<double>() / omega) : "",
           exp && !j["xi_hat"].is_null() ? num(j["xi_hat"].get<double>()) : ""});
  }
  return w.str();
}

void write_dir_atomic(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::path tmp = dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  for (const auto& [name, content] : files) write_file_atomic(tmp / name, content);
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

}  // namespace

void write_scan(const ScanResult& result, const ScanConfig& cfg) {
  const fs::path root = cfg.output_dir;
  fs::create_directories(root);
  const Units units(PhysicalConstants::cesium133(), cfg.lattice.wavelength_m);

  std::vector<Json> reports;
  CsvWriter fig2({"n", "dx", "t_us", "abs_A", "mt_bound", "ml_bound", "unified_bound", "tau_c_us"});
  Json failures = Json::array();
  for (const auto& r : result.points) {
    const Json rep = point_report_json(r, units, cfg.estimator);
    if (r.error) {
      failures.push_back({{"n", r.point.n}, {"dx", r.point.dx}, {"error", *r.error}});
      continue;
    }
    reports.push_back(rep);
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("report.json", rep.dump(2) + "\n");
    if (!r.mt_trace.times.empty()) {
      files.emplace_back("trace.csv", trace_csv(r.mt_trace, units));
      files.emplace_back("trace_ml.csv", trace_csv(r.ml_trace, units));
    }
    if (r.experiment) {
      files.emplace_back("fringes.csv", fringes_csv(r.experiment->records, units));
      files.emplace_back("fits.json", fits_json(r.experiment->records, units).dump(2) + "\n");
    }
    write_dir_atomic(root / point_directory(r.point), files);

    if (!r.report || r.report->stationary) continue;
    const auto& q = *r.report;
    const std::string tc = q.tau_c ? num(units.to_us(*q.tau_c)) : "";
    for (std::size_t i = 0; i < r.mt_trace.size(); ++i) {
      const double t = r.mt_trace.times[i];
      fig2.row({std::to_string(r.point.n), num(r.point.dx), num(units.to_us(t)), num(r.mt_trace.abs(i)),
                cell(mt_bound(q.dE, t)), cell(ml_bound(q.E, t)), cell(unified_bound(q.E, q.dE, t)), tc});
    }
  }
  write_file_atomic(root / "fig2.csv", fig2.str());
  write_file_atomic(root / "fig3.csv", fig3_csv(reports));
  write_file_atomic(root / "fig4.csv", fig4_csv(reports));

  CsvWriter theory({"curve", "n", "parameter", "inv_tau_ml", "inv_tau_mt"});
  for (const auto& c : result.curves) {
    for (const auto& p : c.points) {
      theory.row({c.name, std::to_string(c.n), num(p.parameter), num(p.inv_tau_ml), num(p.inv_tau_mt)});
    }
  }
  write_file_atomic(root / "fig3_theory.csv", theory.str());
  write_file_atomic(root / "failures.json", failures.dump(2) + "\n");

  Json summary;
  summary["grid"] = cfg.default_points ? "default grid" : "custom";
  summary["estimator"] = std::string(name(cfg.estimator));
  summary["seed"] = cfg.seed;
  summary["sites"] = cfg.lattice.sites;
  summary["points_per_site"] = cfg.lattice.points_per_site;
  summary["depth_Er"] = cfg.lattice.depth_at_zero;
  summary["wavelength_nm"] = cfg.lattice.wavelength_m * 1e9;
  summary["time_points"] = cfg.time_points;
  summary["points"] = result.points.size();
  summary["failures"] = result.failures;
  summary["bound_violations"] = result.violations;
  summary["theory_mismatch"] = result.theory_mismatch;
  write_file_atomic(root / "summary.json", summary.dump(2) + "\n");
}

std::size_t aggregate_reports(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParameterError("report: not a directory: " + dir.string());
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "report.json")) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<Json> reports;
  for (const auto& d : subdirs) {
    std::ifstream f(d / "report.json");
    reports.push_back(Json::parse(f));
  }
  std::stable_sort(reports.begin(), reports.end(), [](const Json& a, const Json& b) {
    return std::make_pair(a["n"].get<int>(), a["dx_halflambda"].get<double>()) <
           std::make_pair(b["n"].get<int>(), b["dx_halflambda"].get<double>());
  });
  write_file_atomic(dir / "fig3.csv", fig3_csv(reports));
  write_file_atomic(dir / "fig4.csv", fig4_csv(reports));
  return reports.size();
}

}  // namespace qslab
