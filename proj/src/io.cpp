#include "qslab/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "qslab/error.hpp"

namespace qslab {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ParameterError("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ParameterError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : width_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw ParameterError("csv: row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
  return *this;
}

std::string energies_csv(std::span<const double> energies) {
  CsvWriter w({"index", "energy_Er"});
  for (std::size_t i = 0; i < energies.size(); ++i) w.row({std::to_string(i), num(energies[i])});
  return w.str();
}

std::string bands_csv(const std::vector<BandStructure>& bands) {
  CsvWriter w({"band", "q", "energy_Er"});
  for (const auto& b : bands) {
    for (std::size_t i = 0; i < b.quasimomentum.size(); ++i) {
      w.row({std::to_string(b.band_index), num(b.quasimomentum[i]), num(b.energies[i])});
    }
  }
  return w.str();
}

std::string trace_csv(const OverlapTrace& trace, const Units& units) {
  CsvWriter w({"t_us", "re_A", "im_A", "abs_A", "fs_distance"});
  for (std::size_t i = 0; i < trace.size(); ++i) {
    w.row({num(units.to_us(trace.times[i])), num(trace.overlaps[i].real()), num(trace.overlaps[i].imag()),
           num(trace.abs(i)), num(trace.fs_distance(i))});
  }
  return w.str();
}

std::string fringes_csv(const std::vector<FringeRecord>& records, const Units& units) {
  CsvWriter w({"t_us", "phi_r", "n_total", "n_down"});
  for (const auto& r : records) {
    for (const auto& s : r.samples) {
      w.row({num(units.to_us(r.t)), num(s.phi_r), std::to_string(s.n_total), std::to_string(s.n_down)});
    }
  }
  return w.str();
}

Json fits_json(const std::vector<FringeRecord>& records, const Units& units) {
  Json arr = Json::array();
  for (const auto& r : records) {
    arr.push_back({{"t_us", units.to_us(r.t)},
                   {"v", r.fit.v},
                   {"v_err", r.fit.v_err},
                   {"phi", r.fit.phi},
                   {"phi_err", std::isfinite(r.fit.phi_err) ? Json(r.fit.phi_err) : Json(nullptr)}});
  }
  return arr;
}

namespace {
Json opt(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }
Json finite(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
}  // namespace

Json report_json(const QslReport& r, const Units& units) {
  Json j;
  j["e_Er"] = r.E;
  j["de_Er"] = r.dE;
  j["tau_mt_us"] = finite(units.to_us(r.tau_mt));
  j["tau_ml_us"] = finite(units.to_us(r.tau_ml));
  j["tau_c_us"] = r.tau_c ? Json(units.to_us(*r.tau_c)) : Json(nullptr);
  j["regime"] = std::string(name(r.regime));
  j["xi_spectral"] = opt(r.xi_spectral);
  j["xi_fit"] = opt(r.xi_fit);
  j["min_margin"] = r.stationary ? Json(nullptr) : finite(r.min_margin);
  return j;
}

}  // namespace qslab
