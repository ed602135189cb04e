#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace dwell {

/// Minimal polyline plot: axes box, min/max tick labels, one path per
/// series. No external plotting dependency.
struct SvgSeries {
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
};

inline void write_svg_plot(std::ostream& os, const std::vector<SvgSeries>& series, const std::string& x_label = "",
                           const std::string& y_label = "") {
  const double width = 800.0, height = 500.0, margin = 55.0;
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (first) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        first = false;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  auto px = [&](double x) { return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2.0 * margin); };
  auto py = [&](double y) { return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2.0 * margin); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin << "\" height=\""
     << height - 2 * margin << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      os << px(x) << "," << py(y) << " ";
    }
    os << "\"/>\n";
  }
  os << "<text x=\"" << margin << "\" y=\"" << height - margin + 18 << "\" font-size=\"12\">" << num(x_lo)
     << "</text>\n";
  os << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 18
     << "\" font-size=\"12\" text-anchor=\"end\">" << num(x_hi) << "</text>\n";
  os << "<text x=\"" << margin - 6 << "\" y=\"" << height - margin << "\" font-size=\"12\" text-anchor=\"end\">"
     << num(y_lo) << "</text>\n";
  os << "<text x=\"" << margin - 6 << "\" y=\"" << margin + 6 << "\" font-size=\"12\" text-anchor=\"end\">"
     << num(y_hi) << "</text>\n";
  if (!x_label.empty())
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" font-size=\"13\" text-anchor=\"middle\">"
       << x_label << "</text>\n";
  if (!y_label.empty())
    os << "<text x=\"16\" y=\"" << height / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << height / 2 << ")\">" << y_label << "</text>\n";
  os << "</svg>\n";
}

}  // namespace dwell
