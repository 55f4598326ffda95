// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "client/gen_client.hpp"
#include "trace/types.hpp"

namespace moeroute::search {

/// Slack on the cumulative-probability comparison so that probabilities that
/// sum to exactly the target after exp(log(p)) round-tripping still count.
inline constexpr double kProbabilityEpsilon = 1e-9;

/// Fork candidates for one decode step: the longest prefix of the
/// probability-sorted list whose running sum stays <= p_target, truncated to
/// k_max. Empty when that prefix has fewer than two entries.
std::vector<trace::TopLogprob> fork_candidates(std::span<const trace::TopLogprob> row, double p_target, int k_max,
                                               double* cumulative = nullptr);

/// Scans every step of `node`. Throws Error(invalid_argument) on an empty
/// logprob row.
std::vector<trace::DecisionPoint> detect_decision_points(const trace::GenNode& node, double p_target, int k_max);

enum class Completion { completed, truncated, error };

Completion classify_completion(const client::GenResponse& resp);

}  // namespace moeroute::search
