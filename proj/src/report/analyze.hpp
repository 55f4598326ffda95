// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "equiv/compile.hpp"
#include "metrics/analysis.hpp"

namespace moeroute::report {

inline constexpr int kReportSchemaVersion = 1;

struct AnalyzeOptions {
  std::filesystem::path store_dir;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // defaults to the run's seed
  equiv::CompileOptions compile;
  bool skip_compile = false;
  std::size_t pair_cap = 20000;
  int bin_width = 10;
  std::optional<int> coact_layer;  // defaults to the diff-tok peak layer
  unsigned compile_jobs = 0;
};

struct AnalyzeResult {
  nlohmann::json report;
  std::vector<std::string> files;  // written, relative to out_dir
};

/// Loads a run store, groups its code by O0 assembly, computes the routing
/// statistics, and writes CSV tables, SVG figures, and report.json to
/// out_dir. Throws Error(insufficient_data) for a store without completed
/// nodes, or for fewer than two compiled nodes unless skip_compile is set.
AnalyzeResult analyze(const AnalyzeOptions& opts);

/// Throws Error(corruption) describing the first schema violation.
void validate_report(const nlohmann::json& report);

}  // namespace moeroute::report
