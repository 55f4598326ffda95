// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "equiv/lexer.hpp"
#include "metrics/align.hpp"
#include "metrics/corpus.hpp"

namespace moeroute::metrics {

enum class Condition { within, between };

/// Counts of (|A ∩ B|, |A ∪ B|) outcomes. Means computed from it do not
/// depend on the order in which pairs were added.
class OverlapHist {
 public:
  explicit OverlapHist(int slots = 8);
  void add(int inter, int uni, std::uint64_t times = 1);
  void merge(const OverlapHist& other);
  std::uint64_t count() const { return count_; }
  /// Mean Jaccard; NaN when empty.
  double mean() const;

 private:
  int slots_;
  std::vector<std::uint64_t> cells_;
  std::uint64_t count_ = 0;
};

struct Cell {
  double mean = std::nan("");
  std::uint64_t n = 0;
};

/// Column order of LayerConditionTable::cells.
enum Column { kWSame = 0, kWDiff = 1, kBSame = 2, kBDiff = 3 };
inline constexpr const char* kColumnNames[4] = {"W_same", "W_diff", "B_same", "B_diff"};

inline constexpr std::array<int, 8> kReportLayers = {0, 4, 8, 14, 20, 26, 34, 38};

struct LayerConditionTable {
  int n_layers = 0;
  std::vector<std::array<Cell, 4>> cells;     // [layer][column]
  std::vector<std::array<Cell, 2>> by_kind;   // [layer][same, diff], both conditions
  std::vector<Cell> all;                      // [layer], every aligned pair
  std::size_t within_node_pairs = 0;
  std::size_t between_node_pairs = 0;
  double within_coverage = std::nan("");      // mean alignment coverage
  double between_coverage = std::nan("");

  /// Mean over all layers of per-layer means, skipping empty layers.
  double layer_mean(int column) const;
  /// Same over the report layers that exist.
  double report_mean(int column) const;
  double all_layer_mean() const;
  std::vector<double> column_values(int column) const;
  std::vector<double> kind_values(PairKind kind) const;
  /// First layer attaining the column's maximum, -1 when the column is empty.
  int argmax_layer(int column) const;
};

struct PairSampling {
  std::size_t within_all_max = 30;     // groups up to this size use every pair
  std::size_t within_per_member = 30;  // larger groups draw this many pairs per member
  std::size_t between_cap = 20000;
  std::uint64_t seed = 0;
};

struct NodePair {
  std::size_t a = 0;
  std::size_t b = 0;
  Condition condition = Condition::within;
};

/// Node pairs to compare. `groups` hold corpus indices.
std::vector<NodePair> sample_pairs(const std::vector<std::vector<std::size_t>>& groups, const PairSampling& s);

/// Per corpus node, per full-sequence position: lex class of the model token,
/// or nullopt if it maps to no source byte. Nodes whose code cannot be
/// extracted or lexed get an empty vector and are counted in `skipped`.
struct TokenClasses {
  std::vector<std::vector<std::optional<equiv::LexClass>>> classes;
  std::size_t skipped = 0;
};
TokenClasses token_classes(const Corpus& corpus, const std::string& stop_token);

struct TokenTypeRow {
  equiv::LexClass cls = equiv::LexClass::identifier;
  Cell same;  // all-layer mean Jaccard, n = aligned positions
  Cell diff;
};

struct PairStats {
  LayerConditionTable layers;
  std::vector<TokenTypeRow> token_types;  // within-group pairs only, one row per class
  std::size_t token_type_skipped_nodes = 0;
};

/// Aligns every sampled pair and accumulates per-layer overlap statistics;
/// positions whose routing is unknown (forced tokens) are skipped. Token
/// classes are optional; for diff_tok positions node_a's class is used.
/// Throws Error(insufficient_data) with fewer than two nodes.
PairStats compute_pair_stats(const Corpus& corpus, const std::vector<std::vector<std::size_t>>& groups,
                             const PairSampling& sampling, const TokenClasses* classes = nullptr);

LayerConditionTable layer_condition_stats(const Corpus& corpus, const std::vector<std::vector<std::size_t>>& groups,
                                          const PairSampling& sampling);
std::vector<TokenTypeRow> token_type_stats(const Corpus& corpus, const std::vector<std::vector<std::size_t>>& groups,
                                           const TokenClasses& classes, const PairSampling& sampling);

struct CoactMatrix {
  int layer = 0;
  int n = 0;
  std::vector<std::uint64_t> counts;       // n x n, symmetric, zero diagonal
  std::vector<std::uint64_t> activations;  // per expert
  std::vector<int> order;                  // experts by descending activation, then ID
  std::uint64_t positions = 0;
  double zero_pair_fraction = 0.0;

  std::uint64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * n + j]; }
};

/// Counts co-selection over the generated positions of every completed node.
CoactMatrix coactivation_matrix(const trace::RunStore& store, int layer);

/// 2^H of expert selection counts per layer over the same positions.
std::vector<double> effective_experts_per_layer(const trace::RunStore& store);

struct DecayBin {
  std::size_t offset_lo = 0;
  Cell same;
  Cell diff;
  double same_ratio = std::nan("");
};

struct DecayCurve {
  int bin_width = 10;
  std::vector<DecayBin> bins;
  std::size_t pairs = 0;
  std::vector<std::array<Cell, 2>> by_layer;  // step-aligned [layer][same, diff]
};

/// Compares sibling continuations position by position from the fork onward.
/// For a (parent, child) pair the parent's token after the fork step lines up
/// with the child's first generated token; two children line up from their
/// first generated tokens. Offsets are binned by `bin_width`.
DecayCurve decay_curve(const trace::RunStore& store, const std::vector<trace::SiblingPair>& pairs,
                       int bin_width = 10);

}  // namespace moeroute::metrics
