// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the unit tests: scratch directories and synthetic nodes.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "common/hash.hpp"
#include "trace/types.hpp"

namespace moeroute::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    std::string tmpl = (std::filesystem::temp_directory_path() / ("moeroute-" + tag + "-XXXXXX")).string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// A valid trace: each row is `slots` distinct IDs below n_experts.
inline trace::RoutingTrace random_trace(std::size_t n_tokens, int n_layers, int slots, int n_experts,
                                        SplitMix& rng) {
  std::vector<trace::ExpertId> ids;
  ids.reserve(n_tokens * n_layers * slots);
  std::vector<trace::ExpertId> perm(static_cast<std::size_t>(n_experts));
  for (std::size_t t = 0; t < n_tokens * static_cast<std::size_t>(n_layers); ++t) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int s = 0; s < slots; ++s) {
      auto j = s + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_experts - s)));
      std::swap(perm[s], perm[j]);
      ids.push_back(perm[s]);
    }
  }
  return trace::RoutingTrace(n_tokens, n_layers, slots, std::move(ids));
}

// Trace whose every row is {base, base+1, ..., base+slots-1}.
inline trace::RoutingTrace constant_trace(std::size_t n_tokens, int n_layers, int slots, int base = 0) {
  std::vector<trace::ExpertId> ids;
  for (std::size_t i = 0; i < n_tokens * static_cast<std::size_t>(n_layers); ++i)
    for (int s = 0; s < slots; ++s) ids.push_back(base + s);
  return trace::RoutingTrace(n_tokens, n_layers, slots, std::move(ids));
}

// Node with the given tokens; texts are "t<id>" unless supplied.
inline trace::GenNode make_node(std::vector<trace::TokenId> tokens, trace::RoutingTrace tr,
                                std::optional<std::string> parent = std::nullopt,
                                std::optional<int> branch_step = std::nullopt,
                                std::optional<trace::TokenId> forced = std::nullopt,
                                trace::Finish finish = trace::Finish::completed,
                                std::vector<std::string> texts = {}) {
  trace::GenNode n;
  n.parent_id = parent;
  n.branch_step = branch_step;
  n.forced_token = forced;
  if (forced) n.forced_text = "f" + std::to_string(*forced);
  n.node_id = trace::make_node_id(parent, branch_step, forced);
  if (texts.empty())
    for (auto t : tokens) texts.push_back("t" + std::to_string(t));
  n.gen_token_texts = std::move(texts);
  for (auto t : tokens) n.top_logprobs.push_back({{t, 0.0, "t" + std::to_string(t)}});
  n.gen_token_ids = std::move(tokens);
  n.trace = std::move(tr);
  n.finish = finish;
  return n;
}

// Small run configuration for synthetic stores.
inline trace::RunConfig small_config(int n_layers = 4, int slots = 8, int n_experts = 64) {
  trace::RunConfig c;
  c.n_layers = n_layers;
  c.routed_experts_per_layer = slots;
  c.n_routed_experts = n_experts;
  return c;
}

}  // namespace moeroute::testing
