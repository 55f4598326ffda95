// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "search/decision_points.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace moeroute::search {

std::vector<trace::TopLogprob> fork_candidates(std::span<const trace::TopLogprob> row, double p_target, int k_max,
                                               double* cumulative) {
  std::vector<trace::TopLogprob> sorted(row.begin(), row.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const trace::TopLogprob& a, const trace::TopLogprob& b) { return a.logprob > b.logprob; });
  double cum = 0.0;
  std::size_t keep = 0;
  for (const auto& c : sorted) {
    const double next = cum + std::exp(c.logprob);
    if (next > p_target + kProbabilityEpsilon) break;
    cum = next;
    ++keep;
  }
  if (keep < 2) {
    if (cumulative) *cumulative = 0.0;
    return {};
  }
  keep = std::min(keep, static_cast<std::size_t>(std::max(k_max, 0)));
  sorted.resize(keep);
  if (cumulative) {
    cum = 0.0;
    for (const auto& c : sorted) cum += std::exp(c.logprob);
    *cumulative = cum;
  }
  return sorted;
}

std::vector<trace::DecisionPoint> detect_decision_points(const trace::GenNode& node, double p_target, int k_max) {
  std::vector<trace::DecisionPoint> out;
  for (std::size_t step = 0; step < node.top_logprobs.size(); ++step) {
    const auto& row = node.top_logprobs[step];
    if (row.empty()) {
      fail(ErrorCode::invalid_argument,
           "node " + node.node_id + " has an empty logprob row at step " + std::to_string(step));
    }
    double cum = 0.0;
    auto cands = fork_candidates(row, p_target, k_max, &cum);
    if (cands.size() >= 2) out.push_back({node.node_id, static_cast<int>(step), std::move(cands), cum});
  }
  return out;
}

Completion classify_completion(const client::GenResponse& resp) {
  switch (resp.finish) {
    case client::FinishReason::stop: return Completion::completed;
    case client::FinishReason::length: return Completion::truncated;
    case client::FinishReason::error: return Completion::error;
  }
  return Completion::error;
}

}  // namespace moeroute::search
