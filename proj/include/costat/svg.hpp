#pragma once

#include <array>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "costat/io_util.hpp"

namespace costat {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // data coordinates
};

// Minimal static line chart: axes over [0, x_max] x [0, y_max], one
// polyline per series, legend by series label. Output has no timestamps or
// other run-dependent content, so identical inputs give identical bytes.
inline std::string line_chart_svg(std::string_view x_label, std::string_view y_label,
                                  std::span<const SvgSeries> series, double x_max = 1.0,
                                  double y_max = 1.0, bool diagonal = false) {
  constexpr double width = 720, height = 540;
  constexpr double left = 80, right = 680, top = 40, bottom = 480;
  constexpr std::array<std::string_view, 6> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                                       "#9467bd", "#ff7f0e", "#8c564b"};
  auto sx = [&](double x) { return left + (x / x_max) * (right - left); };
  auto sy = [&](double y) { return bottom - (y / y_max) * (bottom - top); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = x_max * i / 4.0;
    const double fy = y_max * i / 4.0;
    out << "<line x1=\"" << sx(fx) << "\" y1=\"" << bottom << "\" x2=\"" << sx(fx) << "\" y2=\""
        << bottom + 6 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx(fx) << "\" y=\"" << bottom + 22
        << "\" font-size=\"13\" text-anchor=\"middle\">" << format_double(fx) << "</text>\n";
    out << "<line x1=\"" << left - 6 << "\" y1=\"" << sy(fy) << "\" x2=\"" << left << "\" y2=\""
        << sy(fy) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 10 << "\" y=\"" << sy(fy) + 4
        << "\" font-size=\"13\" text-anchor=\"end\">" << format_double(fy) << "</text>\n";
  }
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left
      << "\" height=\"" << bottom - top << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 14
      << "\" font-size=\"15\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"22\" y=\"" << (top + bottom) / 2
      << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
      << (top + bottom) / 2 << ")\">" << y_label << "</text>\n";

  if (diagonal) {
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(x_max) << "\" y2=\""
        << sy(y_max) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"5,5\"/>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto color = palette[s % palette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& [x, y] : series[s].points) {
      out << format_double(sx(x)) << ',' << format_double(sy(y)) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 20 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << right - 150 << "\" y1=\"" << ly << "\" x2=\"" << right - 120
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << right - 112 << "\" y=\"" << ly + 4 << "\" font-size=\"13\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace costat
