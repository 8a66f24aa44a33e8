#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ethloc/error.hpp"

namespace ethloc::io {

enum class Schema { coeffs, binned, prediction, banding, gaps, peaks, profile, localize, spectrum };

inline const std::vector<std::string>& schema_columns(Schema s) {
  static const std::vector<std::string> coeffs{"E_alpha", "E_sum_ij", "abs_c"};
  static const std::vector<std::string> binned{"Ebar_center", "omega_mid", "mean_sq", "count", "std_err"};
  static const std::vector<std::string> prediction{"model", "Ebar", "omega", "f", "entropic_factor", "variance"};
  static const std::vector<std::string> banding{"E_alpha", "E_beta", "abs_O"};
  static const std::vector<std::string> gaps{"i", "j", "omega_gap"};
  static const std::vector<std::string> peaks{"omega_peak", "mean_sq", "prominence", "nearest_gap", "matched"};
  static const std::vector<std::string> profile{"offset", "mean_sq", "count", "h"};
  static const std::vector<std::string> localize{"value", "multiplicity", "spread"};
  static const std::vector<std::string> spectrum{"k", "eigenvalue"};
  switch (s) {
    case Schema::coeffs: return coeffs;
    case Schema::binned: return binned;
    case Schema::prediction: return prediction;
    case Schema::banding: return banding;
    case Schema::gaps: return gaps;
    case Schema::peaks: return peaks;
    case Schema::profile: return profile;
    case Schema::localize: return localize;
    case Schema::spectrum: return spectrum;
  }
  return coeffs;
}

/// Floats with 9 significant digits; identical inputs give identical text.
inline std::string format_real(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

using Cell = std::variant<double, long long, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

/// Streams rows of a fixed schema to a CSV file with a header line.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, Schema schema) : path_(path), width_(schema_columns(schema).size()) {
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
      if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    out_.open(path, std::ios::trunc);
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    const auto& cols = schema_columns(schema);
    for (std::size_t k = 0; k < cols.size(); ++k) out_ << (k ? "," : "") << cols[k];
    out_ << '\n';
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) throw IoError("row width does not match the schema of '" + path_.string() + "'");
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << format_cell(cells[k]);
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("error while writing '" + path_.string() + "'");
  }

  ~CsvWriter() {
    if (out_.is_open()) out_.close();
  }

private:
  std::filesystem::path path_;
  std::size_t width_;
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

}  // namespace ethloc::io
