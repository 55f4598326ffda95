// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace moeroute::trace {

using TokenId = std::int32_t;
using ExpertId = std::int32_t;

/// Layers whose index satisfies `index % period == offset` are full-attention
/// layers; all others are linear-attention (GDN) layers.
struct LayerRule {
  int period = 4;
  int offset = 3;

  bool is_full_attention(int layer) const { return period > 0 && layer % period == offset; }
  bool operator==(const LayerRule&) const = default;
};

struct RunConfig {
  std::string endpoint_url = "http://127.0.0.1:30000";
  std::string endpoint_profile;  // optional path to a field-name profile
  double p_target = 0.40;
  int k_max_forks = 20;
  std::chrono::milliseconds timeout = std::chrono::minutes(30);
  int max_concurrent = 50;
  double temperature = 0.7;
  double top_p = 0.95;
  int top_k = 20;
  int max_gen_len = 2048;
  int top_logprobs_num = 30;
  int n_layers = 40;
  int routed_experts_per_layer = 8;
  int n_routed_experts = 256;
  LayerRule fa_layer_rule;
  std::string stop_token = "</function>";
  bool thinking_skip = true;
  bool fork_includes_sampled = false;
  std::uint64_t seed = 0;
  std::string system_text = "You are a coding assistant. Reply with C source only.";
  std::string user_text =
      "Write a C function that sorts an int array in ascending order. The array is large and "
      "mostly sorted already. Use only the C standard library.";
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{1000};

  /// Throws Error(config) on any invariant violation.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Stable hash of the canonical JSON form, used to tag every report table.
std::string config_hash(const RunConfig& c);

/// Per-token, per-layer top-k routed expert IDs, stored token-major then layer
/// then slot.
class RoutingTrace {
 public:
  RoutingTrace() = default;
  RoutingTrace(std::size_t n_tokens, int n_layers, int slots, std::vector<ExpertId> ids);

  std::size_t n_tokens() const { return n_tokens_; }
  int n_layers() const { return n_layers_; }
  int slots() const { return slots_; }
  const std::vector<ExpertId>& data() const { return ids_; }

  std::span<const ExpertId> row(std::size_t token, int layer) const {
    return {ids_.data() + (token * n_layers_ + layer) * slots_, static_cast<std::size_t>(slots_)};
  }
  /// All layers of one token, contiguous.
  const ExpertId* token_rows(std::size_t token) const { return ids_.data() + token * n_layers_ * slots_; }

  /// Checks shape against the run configuration, ID range, and per-row
  /// distinctness. Throws Error(invalid_argument).
  void check(int n_layers, int slots, int n_experts) const;

  bool operator==(const RoutingTrace&) const = default;

 private:
  std::size_t n_tokens_ = 0;
  int n_layers_ = 0;
  int slots_ = 0;
  std::vector<ExpertId> ids_;
};

struct TopLogprob {
  TokenId token_id = 0;
  double logprob = 0.0;
  std::string text;

  bool operator==(const TopLogprob&) const = default;
};

enum class Finish { completed, truncated, error };

const char* to_string(Finish f);
Finish finish_from_string(const std::string& s);

struct GenNode {
  std::string node_id;
  std::optional<std::string> parent_id;
  std::optional<int> branch_step;
  std::optional<TokenId> forced_token;
  std::string forced_text;
  std::string prefix_text;
  std::vector<TokenId> gen_token_ids;
  std::vector<std::string> gen_token_texts;
  std::vector<std::vector<TopLogprob>> top_logprobs;
  RoutingTrace trace;
  Finish finish = Finish::error;
  int depth = 0;
  std::optional<std::int64_t> prompt_tokens;
  bool retokenized = false;
  std::string error;

  bool is_root() const { return !parent_id.has_value(); }
  bool operator==(const GenNode&) const = default;
};

void to_json(nlohmann::json& j, const GenNode& n);
void from_json(const nlohmann::json& j, GenNode& n);

/// Deterministic ID from the fork coordinates; the root has no coordinates.
std::string make_node_id(const std::optional<std::string>& parent_id, std::optional<int> branch_step,
                         std::optional<TokenId> forced_token);

struct DecisionPoint {
  std::string node_id;
  int step = 0;
  std::vector<TopLogprob> candidates;
  double cumulative_prob = 0.0;
};

struct SiblingPair {
  std::string node_a;
  std::string node_b;
  int fork_step = 0;

  bool operator==(const SiblingPair&) const = default;
};

}  // namespace moeroute::trace
