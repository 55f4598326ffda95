// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "trace/types.hpp"

namespace moeroute::trace {

struct Manifest {
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0.0;
  std::size_t completed = 0;
  std::size_t truncated = 0;
  std::size_t errors = 0;
  std::size_t forks_scheduled = 0;
  std::size_t retokenized = 0;
  int max_in_flight = 0;
  bool timed_out = false;
};

void to_json(nlohmann::json& j, const Manifest& m);
void from_json(const nlohmann::json& j, Manifest& m);

/// A completed node's code as the endpoint saw it: inherited ancestor tokens,
/// forced tokens, then the node's own generated tokens. `rows[i]` points at the
/// token's routing (all layers, contiguous) or is null for forced tokens,
/// whose routing happened during prefill and was never returned.
struct FullSequence {
  std::vector<TokenId> token_ids;
  std::vector<std::string> token_texts;
  std::vector<const ExpertId*> rows;
  std::size_t own_start = 0;  // index of the node's first generated token

  std::string text() const;
};

/// Tree of generations plus its JSONL persistence. Appends are serialized
/// through one mutex so completion callbacks may call store_node concurrently;
/// every read-side accessor assumes the store is no longer being written.
class RunStore {
 public:
  /// In-memory store; nothing is persisted.
  explicit RunStore(RunConfig config);
  /// Persistent store writing `dir/nodes.jsonl` (truncated) and, on finalize,
  /// `dir/manifest.json`.
  static RunStore create(const std::filesystem::path& dir, RunConfig config);
  static RunStore load(const std::filesystem::path& dir);

  RunStore(RunStore&&) noexcept;
  RunStore& operator=(RunStore&&) noexcept;
  ~RunStore();

  /// Validates and appends. Returns the node ID; a node whose ID is already
  /// stored is ignored. Throws Error(invalid_argument) on a dangling parent,
  /// a trace shape mismatch, or inconsistent per-step arrays.
  std::string store_node(GenNode node);

  /// Writes the manifest. Counts are recomputed from the stored nodes.
  void finalize(Manifest manifest);

  const RunConfig& config() const { return config_; }
  const Manifest& manifest() const { return manifest_; }
  const std::map<std::string, GenNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const GenNode* find(const std::string& id) const;
  const GenNode& node(const std::string& id) const;
  std::vector<std::string> children(const std::string& id) const;
  std::optional<std::string> root_id() const { return root_id_; }

  /// Root prefix followed by each ancestor's tokens up to the branch step and
  /// the forced token. Throws Error(corruption) on a cycle.
  std::string reconstruct_prefix(const std::string& id) const;
  FullSequence expand(const std::string& id) const;

  /// Completed pairs that share all context up to a fork step: (parent,
  /// child), and two children forked from one parent at the same step with
  /// the lower ID first. Ordered by (node_a, node_b).
  std::vector<SiblingPair> extract_sibling_pairs() const;

  /// Checks the tree property: one root, all nodes reachable, no cycles.
  void check_tree() const;

 private:
  void check_node(const GenNode& node) const;
  std::vector<const GenNode*> ancestry(const std::string& id) const;

  RunConfig config_;
  Manifest manifest_;
  std::map<std::string, GenNode> nodes_;
  std::multimap<std::string, std::string> children_;
  std::optional<std::string> root_id_;
  std::optional<std::filesystem::path> dir_;
  std::unique_ptr<std::ofstream> out_;
  std::unique_ptr<std::mutex> mutex_;
};

}  // namespace moeroute::trace
