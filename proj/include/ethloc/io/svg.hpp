#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ethloc/error.hpp"
#include "ethloc/io/dataset.hpp"

namespace ethloc::io {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool line = true;  // false draws markers
};

struct PlotSpec {
  std::string title;
  std::string x_label, y_label;
  bool log_y = false;
  int width = 640, height = 420;
};

/// Writes a bare-bones SVG line/scatter plot.
inline void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  auto ty = [&](double v) { return spec.log_y ? (v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double y = ty(s.y[k]);
      if (!std::isfinite(y) || !std::isfinite(s.x[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double ml = 70, mr = 20, mt = 30, mb = 50;
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"18\" text-anchor=\"middle\">" << spec.title << "</text>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 10 << "\" text-anchor=\"middle\">" << spec.x_label
      << "</text>\n";
  out << "<text x=\"14\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << mt + ph / 2
      << ")\">" << (spec.log_y ? "log10 " : "") << spec.y_label << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 15 << "\" text-anchor=\"middle\">" << format_real(xv)
        << "</text>\n";
    out << "<text x=\"" << ml - 5 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << format_real(yv)
        << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % (sizeof palette / sizeof *palette)];
    const auto& ser = series[s];
    if (ser.line) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < ser.x.size(); ++k) {
        const double y = ty(ser.y[k]);
        if (std::isfinite(y)) out << px(ser.x[k]) << "," << py(y) << " ";
      }
      out << "\"/>\n";
    } else {
      for (std::size_t k = 0; k < ser.x.size(); ++k) {
        const double y = ty(ser.y[k]);
        if (std::isfinite(y))
          out << "<circle cx=\"" << px(ser.x[k]) << "\" cy=\"" << py(y) << "\" r=\"1.5\" fill=\"" << color << "\"/>\n";
      }
    }
    out << "<text x=\"" << ml + pw - 5 << "\" y=\"" << mt + 14 + 13 * static_cast<double>(s)
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << ser.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

}  // namespace ethloc::io
