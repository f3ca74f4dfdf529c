#include "qslab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "qslab/error.hpp"

namespace qslab {

Estimator parse_estimator(const std::string& s) {
  if (s == "exact") return Estimator::exact;
  if (s == "experiment") return Estimator::experiment;
  throw ParameterError("unknown estimator '" + s + "' (expected exact|experiment)");
}

std::string_view name(Estimator e) { return e == Estimator::exact ? "exact" : "experiment"; }

std::vector<ScanPoint> default_grid() {
  std::vector<ScanPoint> g;
  for (double dx : {0.025, 0.03, 0.04, 0.05, 0.065, 0.08, 0.1, 0.125, 0.16, 0.2, 0.25, 0.32, 0.4, 0.5}) {
    g.push_back({0, dx});
  }
  for (int n : {1, 2}) {
    for (double dx : {0.03, 0.05, 0.08, 0.12, 0.16, 0.2, 0.25, 0.32, 0.4, 0.5}) g.push_back({n, dx});
  }
  return g;
}

void ScanConfig::validate() const {
  LatticeParams probe = lattice;
  probe.polarization_angle = 0.0;
  probe.validate();
  if (points.empty()) throw ParameterError("scan: no points");
  std::set<std::pair<int, double>> seen;
  for (const auto& p : points) {
    if (p.n < 0 || p.n > 2) throw ParameterError("scan: n must be 0, 1 or 2");
    if (!(p.dx > 0.0 && p.dx <= 0.5)) throw ParameterError("scan: dx outside (0, 0.5]");
    if (!seen.insert({p.n, p.dx}).second) throw ParameterError("scan: duplicate point");
  }
  if (time_points < 8) throw ParameterError("scan: need at least 8 time points");
  if (theory_points < 0) throw ParameterError("scan: theory_points must be >= 0");
  ramsey.validate();
}

namespace {

void reject_unknown(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ParameterError("config: unknown key '" + where + "." + it.key() + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

ScanConfig parse_config(const nlohmann::json& j, ScanConfig c) {
  try {
    if (!j.is_object()) throw ParameterError("config: top level must be an object");
    reject_unknown(j, "", {"lattice", "state", "scan", "ramsey"});
    if (j.contains("lattice")) {
      const auto& l = j.at("lattice");
      reject_unknown(l, "lattice", {"wavelength_nm", "depth_Er", "sites", "points_per_site"});
      if (l.contains("wavelength_nm")) c.lattice.wavelength_m = l.at("wavelength_nm").get<double>() * 1e-9;
      read(l, "depth_Er", c.lattice.depth_at_zero);
      read(l, "sites", c.lattice.sites);
      read(l, "points_per_site", c.lattice.points_per_site);
    }
    if (j.contains("scan")) {
      const auto& s = j.at("scan");
      reject_unknown(s, "scan", {"points", "time_points", "estimator", "seed", "workers", "theory_points",
                                 "output_dir", "leakage_monitor"});
      if (s.contains("points")) {
        c.points.clear();
        c.default_points = false;
        for (const auto& p : s.at("points")) c.points.push_back({p.at("n").get<int>(), p.at("dx").get<double>()});
      }
      read(s, "time_points", c.time_points);
      if (s.contains("estimator")) c.estimator = parse_estimator(s.at("estimator").get<std::string>());
      read(s, "seed", c.seed);
      read(s, "workers", c.workers);
      read(s, "theory_points", c.theory_points);
      read(s, "leakage_monitor", c.leakage_monitor);
      if (s.contains("output_dir")) c.output_dir = s.at("output_dir").get<std::string>();
    }
    if (j.contains("state")) {
      const auto& st = j.at("state");
      reject_unknown(st, "state", {"n", "dx_halflambda"});
      c.points = {{st.at("n").get<int>(), st.at("dx_halflambda").get<double>()}};
      c.default_points = false;
    }
    if (j.contains("ramsey")) {
      const auto& r = j.at("ramsey");
      reject_unknown(r, "ramsey", {"phases", "atoms_per_shot", "repetitions", "loss_fraction",
                                   "light_shift_rad_per_us"});
      if (r.contains("phases")) {
        const RamseyConfig fresh = RamseyConfig::defaults(r.at("phases").get<int>());
        c.ramsey.phase_grid = fresh.phase_grid;
      }
      read(r, "atoms_per_shot", c.ramsey.atoms_per_shot);
      read(r, "repetitions", c.ramsey.repetitions);
      read(r, "loss_fraction", c.ramsey.loss_fraction);
      read(r, "light_shift_rad_per_us", c.ramsey.light_shift_slope);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ScanConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace qslab
