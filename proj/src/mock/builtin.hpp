// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mock/mock_config.hpp"

namespace moeroute::mock {

/// Locality schedule low at the input layers, peaked mid-network, moderate in
/// the deep layers.
std::vector<std::pair<int, double>> crossing_anchors();

/// C sorting-function grammar with comment-word forks (same assembly),
/// constant forks (different assembly), and sampled blank-line, naming, and
/// statement-order variation.
MockConfig builtin_grammar_config(std::uint64_t seed = 7);

/// Same grammar with one locality value on every layer.
MockConfig builtin_grammar_config_flat(double locality, std::uint64_t seed = 7);

/// Scripted mode: a single three-candidate decision point at the first
/// generated step, then a short fixed continuation.
MockConfig scripted_root_dp_config(std::uint64_t seed = 7);

/// Names accepted by `config_by_name`: "crossing", "scripted", "flat".
MockConfig config_by_name(const std::string& name);

}  // namespace moeroute::mock
