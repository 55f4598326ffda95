// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "trace/types.hpp"

namespace moeroute::mock {

using trace::TokenId;

struct GrammarEdge {
  TokenId token = 0;
  double weight = 0.0;
  int next = -1;  // -1 only on edges that emit the stop token
};

struct GrammarState {
  std::vector<GrammarEdge> edges;
};

/// Weighted next-token table. Every state's edge weights sum to 1.
struct Grammar {
  std::vector<GrammarState> states;
  int start = 0;
};

struct ScriptStep {
  std::vector<std::pair<TokenId, double>> top;  // reported distribution, descending
  TokenId emit = 0;
};

struct MockConfig {
  std::vector<std::string> vocab;
  std::string stop_token = "</function>";
  std::uint64_t seed = 0;
  int n_layers = 40;
  int slots = 8;
  int n_routed_experts = 256;
  int context_window = 16;
  int latency_ms = 0;
  int threads = 64;
  /// Per-layer mixing weight: 0 routes on token identity only, 1 on the
  /// preceding context only.
  std::vector<double> locality;
  std::optional<Grammar> grammar;
  std::optional<std::vector<ScriptStep>> script;

  bool scripted() const { return script.has_value(); }
  TokenId stop_id() const;
  std::optional<TokenId> find_token(std::string_view text) const;
  const std::string& token_text(TokenId id) const { return vocab.at(static_cast<std::size_t>(id)); }

  /// Greedy longest-match tokenization against the vocabulary; nullopt when
  /// some byte cannot be covered.
  std::optional<std::vector<TokenId>> tokenize(std::string_view text) const;

  /// Throws Error(config) on any invariant violation.
  void validate() const;
  void index_vocab();

  static MockConfig from_json(const nlohmann::json& j);
  static MockConfig load(const std::string& path);
  nlohmann::json to_json() const;

 private:
  std::unordered_map<std::string, TokenId> index_;
  std::size_t max_token_len_ = 0;
};

/// One segment is a list of weighted alternative texts; alternatives are
/// tokenized and merged into a trie, and every alternative's end links to the
/// next segment. The final segment is followed by the stop token.
using Segment = std::vector<std::pair<std::string, double>>;
Grammar compile_segments(const MockConfig& cfg, const std::vector<Segment>& segments);

/// Linear interpolation between (layer, value) anchors, clamped at the ends.
std::vector<double> interpolate_locality(int n_layers, const std::vector<std::pair<int, double>>& anchors);

}  // namespace moeroute::mock
