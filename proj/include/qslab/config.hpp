#pragma once

// Scan configuration and its JSON form.
//
//   {
//     "lattice": {"wavelength_nm": 866, "depth_Er": 270, "sites": 33, "points_per_site": 64},
//     "state":   {"n": 0, "dx_halflambda": 0.04},          // single point, optional
//     "scan":    {"points": [{"n": 0, "dx": 0.04}], "time_points": 64, "estimator": "exact",
//                 "seed": 1, "workers": 0, "theory_points": 40, "output_dir": "out"},
//     "ramsey":  {"phases": 12, "atoms_per_shot": 20, "repetitions": 10,
//                 "loss_fraction": 0.05, "light_shift_rad_per_us": 0}
//   }

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qslab/interferometer.hpp"
#include "qslab/model.hpp"

namespace qslab {

enum class Estimator { exact, experiment };

Estimator parse_estimator(const std::string& s);
std::string_view name(Estimator e);

struct ScanPoint {
  int n;
  double dx;  // lambda/2
};

// 34 combinations: 14 at n = 0 (log-spaced, denser where the ML regime
// lives) and 10 each at n = 1, 2.
std::vector<ScanPoint> default_grid();

struct ScanConfig {
  LatticeParams lattice;  // polarization angle is set per point
  std::vector<ScanPoint> points = default_grid();
  bool default_points = true;
  std::size_t time_points = 64;
  Estimator estimator = Estimator::exact;
  RamseyConfig ramsey = RamseyConfig::defaults();
  std::filesystem::path output_dir = "qslab_out";
  std::uint64_t seed = 1;
  int workers = 0;          // 0: hardware concurrency
  int theory_points = 40;   // per n-series, on top of the scan's own dx values
  bool leakage_monitor = true;

  void validate() const;
};

ScanConfig parse_config(const nlohmann::json& j, ScanConfig base = {});
ScanConfig load_config(const std::filesystem::path& path);

}  // namespace qslab
