// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace moeroute::report {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // NaN breaks the line
};

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double y_min = 0.0, double y_max = 1.0);

std::string bar_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<double>& values);

/// n x n grid coloured by log(1 + value).
std::string heatmap_svg(const std::string& title, int n, const std::vector<std::uint64_t>& values);

}  // namespace moeroute::report
