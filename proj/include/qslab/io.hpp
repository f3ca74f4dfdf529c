#pragma once

// Flat-file output: CSV tables, JSON objects, atomic writes.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qslab/eigensolve.hpp"
#include "qslab/interferometer.hpp"
#include "qslab/qsl.hpp"

namespace qslab {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form.
std::string num(double x);

// Writes via a sibling temporary and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
};

std::string energies_csv(std::span<const double> energies);
std::string bands_csv(const std::vector<BandStructure>& bands);
std::string trace_csv(const OverlapTrace& trace, const Units& units);
std::string fringes_csv(const std::vector<FringeRecord>& records, const Units& units);
Json fits_json(const std::vector<FringeRecord>& records, const Units& units);
// Fixed fields: e_Er, de_Er, tau_mt_us, tau_ml_us, tau_c_us, regime,
// xi_spectral, xi_fit, min_margin (undefined values as null).
Json report_json(const QslReport& r, const Units& units);

}  // namespace qslab
