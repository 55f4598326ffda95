// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "client/gen_client.hpp"
#include "mock/mock_config.hpp"

namespace moeroute::mock {

struct Candidate {
  TokenId token = 0;
  double prob = 0.0;
};

struct SynthStep {
  TokenId token = 0;
  /// Temperature-scaled distribution before top-k/top-p truncation,
  /// descending, at most `top_n` entries.
  std::vector<Candidate> top;
};

/// p_i^(1/T) renormalized. Order is preserved.
std::vector<Candidate> apply_temperature(std::span<const Candidate> dist, double temperature);

/// Samples one token the way a serving engine would: temperature, then top-k,
/// then top-p (smallest descending prefix reaching top_p), renormalize, draw
/// with `u` in [0, 1). Ties in probability keep the input order.
SynthStep synth_next(std::span<const Candidate> dist, const client::SamplingParams& sampling, double u,
                     int top_n = 30);

/// Rolling hash of the `window` token IDs preceding `pos` in `history`;
/// positions before the start of the completion are filled by `prompt_hash`.
std::uint64_t context_hash(std::span<const TokenId> history, std::size_t pos, int window, std::uint64_t prompt_hash);

/// Layer-dependent routing. Each expert gets a score
///   (1 - lambda[layer]) * g_token[e] + lambda[layer] * g_context[e]
/// from two seeded Gaussian vectors; the top `slots` experts win and are then
/// relabeled through a fixed per-layer permutation. Layers that share a
/// lambda therefore give the same overlap statistics.
class RoutingModel {
 public:
  explicit RoutingModel(const MockConfig& cfg);

  /// Experts for one (token, layer) row; `out` must hold `slots` IDs.
  void synth_routing(TokenId token, int layer, std::uint64_t ctx, std::span<trace::ExpertId> out) const;

  /// All layers for one position, appended to `out` layer by layer.
  void route_position(TokenId token, std::uint64_t ctx, std::vector<trace::ExpertId>& out) const;

  int n_layers() const { return n_layers_; }
  int slots() const { return slots_; }

 private:
  void gaussian_vector(std::uint64_t tag, std::uint64_t key, std::vector<double>& out) const;
  void top_experts(const std::vector<double>& g_tok, const std::vector<double>& g_ctx, double lambda, int layer,
                   std::span<trace::ExpertId> out) const;

  std::uint64_t seed_;
  int n_layers_;
  int slots_;
  int n_experts_;
  std::vector<double> locality_;
  std::vector<std::vector<trace::ExpertId>> relabel_;
};

}  // namespace moeroute::mock
