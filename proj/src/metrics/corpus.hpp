// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trace/run_store.hpp"

namespace moeroute::metrics {

/// Completed nodes of a store, expanded to full token sequences, with every
/// routing row turned into per-layer expert bitmasks once. Rows inherited from
/// an ancestor share the ancestor's mask slot, so identical rows are detected
/// by slot equality.
class Corpus {
 public:
  static constexpr std::int32_t kNoRow = -1;

  struct Node {
    std::string node_id;
    trace::FullSequence seq;
    std::vector<std::int32_t> slot;  // per position: mask slot or kNoRow
  };

  explicit Corpus(const trace::RunStore& store);

  const trace::RunStore& store() const { return *store_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t index_of(const std::string& node_id) const;

  int n_layers() const { return n_layers_; }
  int slots() const { return slots_; }
  int n_experts() const { return n_experts_; }
  std::size_t words() const { return words_; }

  const std::uint64_t* mask(std::int32_t slot, int layer) const {
    return masks_.data() + (static_cast<std::size_t>(slot) * static_cast<std::size_t>(n_layers_) +
                            static_cast<std::size_t>(layer)) * words_;
  }

  /// |A ∩ B| and |A ∪ B| of two rows at one layer.
  std::pair<int, int> overlap(std::int32_t sa, std::int32_t sb, int layer) const;

 private:
  const trace::RunStore* store_;
  int n_layers_ = 0;
  int slots_ = 0;
  int n_experts_ = 0;
  std::size_t words_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::uint64_t> masks_;
  std::vector<std::uint8_t> popcounts_;  // per (slot, layer)
};

}  // namespace moeroute::metrics
