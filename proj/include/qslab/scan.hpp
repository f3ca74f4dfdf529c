#pragma once

// Parameter sweeps over (n, dx), per-point pipelines and figure tables.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qslab/config.hpp"
#include "qslab/interferometer.hpp"
#include "qslab/io.hpp"
#include "qslab/qsl.hpp"

namespace qslab {

// Moments of one (n, dx) state: the shared core of scan points and the
// theory curves.
struct StateSummary {
  int n = 0;
  double dx = 0.0;
  double theta = 0.0;
  double depth = 0.0;     // U0(theta)
  double omega = 0.0;     // hbar omega_HO(theta), E_R
  double level = 0.0;     // E_n, band centre above the ground energy
  SpectralMoments moments;
};

StateSummary summarize_state(const LatticeParams& lattice, int n, double dx);

struct PointResult {
  ScanPoint point{};
  StateSummary summary;
  std::optional<QslReport> report;
  OverlapTrace mt_trace;
  OverlapTrace ml_trace;
  double leakage = 0.0;
  double edge_probability = 0.0;
  DecompositionQuality quality;
  std::optional<ExperimentResult> experiment;
  std::vector<std::string> warnings;
  std::optional<std::string> error;

  bool violates_bounds() const;
};

PointResult run_point(const ScanConfig& cfg, const ScanPoint& point);

struct CurvePoint {
  double parameter;   // dx, alpha or zeta
  double inv_tau_ml;  // units of 1/tau_HO = omega/(2 pi)
  double inv_tau_mt;
};

struct ReferenceCurve {
  std::string name;
  int n = -1;  // lattice series index, -1 for analytic curves
  std::vector<CurvePoint> points;
};

// E = omega |alpha|^2, dE = omega |alpha|.
ReferenceCurve coherent_reference_curve(double omega, std::span<const double> alphas);
// Qubit of splitting omega rotated by zeta.
ReferenceCurve qubit_reference_curve(double omega, std::span<const double> zetas);

struct ScanResult {
  std::vector<PointResult> points;
  std::vector<ReferenceCurve> curves;  // lattice series, coherent, qubit
  std::size_t failures = 0;
  std::size_t violations = 0;
  double theory_mismatch = 0.0;  // max distance of a scan point from its lattice curve
};

ScanResult run_scan(const ScanConfig& cfg);

std::string point_directory(const ScanPoint& p);
Json point_report_json(const PointResult& r, const Units& units, Estimator estimator);

// Writes per-point directories and the top-level tables under cfg.output_dir.
void write_scan(const ScanResult& result, const ScanConfig& cfg);

// Rebuilds fig3.csv / fig4.csv from the per-point report.json files of a
// finished scan directory. Returns the number of points read.
std::size_t aggregate_reports(const std::filesystem::path& dir);

}  // namespace qslab
