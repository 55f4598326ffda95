// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/text.hpp"

namespace moeroute::report {

namespace {

constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fixed(v, 2); }

void frame(std::ostringstream& o, const std::string& title, const std::string& xl, const std::string& yl) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
  o << "<text x=\"" << (kLeft + (kW - kRight)) / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << esc(xl) << "</text>\n";
  o << "<text x=\"15\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << kH / 2 << ")\">"
    << esc(yl) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight << "\" height=\""
    << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double y_min, double y_max) {
  double x_min = 0, x_max = 1;
  bool first = true;
  for (const auto& s : series)
    for (double x : s.x) {
      if (first) {
        x_min = x_max = x;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  if (x_max <= x_min) x_max = x_min + 1;
  if (y_max <= y_min) y_max = y_min + 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return kTop + ph - (std::clamp(y, y_min, y_max) - y_min) / (y_max - y_min) * ph; };

  std::ostringstream o;
  frame(o, title, x_label, y_label);
  for (int t = 0; t <= 4; ++t) {
    const double y = y_min + (y_max - y_min) * t / 4.0;
    o << "<text x=\"" << kLeft - 5 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
    const double x = x_min + (x_max - x_min) * t / 4.0;
    o << "<text x=\"" << num(px(x)) << "\" y=\"" << kH - kBottom + 15 << "\" text-anchor=\"middle\">" << num(x)
      << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = kPalette[i % std::size(kPalette)];
    std::string d;
    bool pen = false;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (std::isnan(s.y[k])) {
        pen = false;
        continue;
      }
      d += (pen ? "L" : "M") + num(px(s.x[k])) + " " + num(py(s.y[k])) + " ";
      pen = true;
    }
    o << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 15 + 18 * static_cast<double>(i);
    o << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kW - kRight + 35 << "\" y=\"" << ly + 4 << "\">" << esc(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string bar_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<double>& values) {
  double vmax = 0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax <= 0) vmax = 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  std::ostringstream o;
  frame(o, title, x_label, y_label);
  const double bw = values.empty() ? 0 : pw / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = values[i] / vmax * ph;
    o << "<rect x=\"" << num(kLeft + bw * static_cast<double>(i)) << "\" y=\"" << num(kTop + ph - h) << "\" width=\""
      << num(std::max(bw - 1, 0.5)) << "\" height=\"" << num(h) << "\" fill=\"" << kPalette[0] << "\"/>\n";
  }
  o << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">" << num(vmax) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string heatmap_svg(const std::string& title, int n, const std::vector<std::uint64_t>& values) {
  double lmax = 0;
  for (auto v : values) lmax = std::max(lmax, std::log1p(static_cast<double>(v)));
  if (lmax <= 0) lmax = 1;
  const double side = std::min(kW - kLeft - kRight, kH - kTop - kBottom);
  const double cs = n > 0 ? side / n : 0;
  std::ostringstream o;
  frame(o, title, "expert (sorted by activation)", "expert (sorted by activation)");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto v = values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
      if (v == 0) continue;
      const int shade = 255 - static_cast<int>(std::lround(std::log1p(static_cast<double>(v)) / lmax * 255));
      o << "<rect x=\"" << num(kLeft + cs * j) << "\" y=\"" << num(kTop + cs * i) << "\" width=\"" << num(cs)
        << "\" height=\"" << num(cs) << "\" fill=\"rgb(255," << shade << "," << shade << ")\"/>\n";
    }
  o << "</svg>\n";
  return o.str();
}

}  // namespace moeroute::report
