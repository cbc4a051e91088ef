#pragma once

// Minimal SVG line charts: one or more polylines over a shared x axis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/dynamics.hpp"
#include "dpsub/error.hpp"
#include "dpsub/io/matrix_text.hpp"

namespace dpsub {

struct Series {
  std::string label;
  std::vector<double> y;
};

inline std::string svg_chart(const std::string& title, const std::vector<double>& x,
                             const std::vector<Series>& series, bool log_y = false) {
  constexpr double W = 800, H = 400, left = 70, right = 20, top = 40, bottom = 40;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };

  double xmin = x.empty() ? 0.0 : x.front(), xmax = x.empty() ? 1.0 : x.back();
  double ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (double v : s.y) {
      ymin = std::min(ymin, ty(v));
      ymax = std::max(ymax, ty(v));
    }
  if (!(ymin < ymax)) {
    ymin = std::isfinite(ymin) ? ymin - 1.0 : 0.0;
    ymax = ymin + 2.0;
  }
  if (!(xmin < xmax)) xmax = xmin + 1.0;
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double v) { return top + (ymax - ty(v)) / (ymax - ymin) * (H - top - bottom); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" viewBox=\"0 0 800 400\">\n";
  s += "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
  s += "<line x1=\"70\" y1=\"360\" x2=\"780\" y2=\"360\" stroke=\"black\"/>\n";
  s += "<line x1=\"70\" y1=\"40\" x2=\"70\" y2=\"360\" stroke=\"black\"/>\n";
  auto label = [](double v) { return format_double(std::round(v * 1e4) / 1e4); };
  const std::string ypre = log_y ? "1e" : "";
  s += "<text x=\"64\" y=\"44\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + ypre + label(ymax) + "</text>\n";
  s += "<text x=\"64\" y=\"360\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + ypre + label(ymin) + "</text>\n";
  s += "<text x=\"70\" y=\"376\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + label(xmin) + "</text>\n";
  s += "<text x=\"780\" y=\"376\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + label(xmax) + "</text>\n";
  s += "<text x=\"425\" y=\"394\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">k</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& sr = series[i];
    const char* col = colors[i % 6];
    s += "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"";
    s += col;
    s += "\" points=\"";
    for (std::size_t j = 0; j < sr.y.size() && j < x.size(); ++j) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x[j]), py(sr.y[j]));
      s += buf;
    }
    s += "\"/>\n";
    s += "<text x=\"" + std::to_string(90 + 110 * static_cast<int>(i)) +
         "\" y=\"56\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + col + "\">" + sr.label + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// h(k) on a log scale, and one chart per coordinate of y(k).
inline std::vector<std::pair<std::string, std::string>> trace_charts(const RunTrace& t) {
  std::vector<double> x;
  Series h{"h", {}};
  std::vector<Series> ys(t.dimension);
  for (std::size_t c = 0; c < t.dimension; ++c) ys[c].label = "y_" + std::to_string(c + 1);
  for (const auto& r : t.records) {
    x.push_back(static_cast<double>(r.k));
    h.y.push_back(r.h);
    for (std::size_t c = 0; c < t.dimension; ++c) ys[c].y.push_back(r.y[c]);
  }
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("h.svg", svg_chart("consensus gap h(k), log10", x, {h}, true));
  for (std::size_t c = 0; c < t.dimension; ++c)
    out.emplace_back("y_" + std::to_string(c + 1) + ".svg",
                     svg_chart("network average y_" + std::to_string(c + 1) + "(k)", x, {ys[c]}));
  return out;
}

}  // namespace dpsub
