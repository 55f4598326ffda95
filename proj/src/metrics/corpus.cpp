// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/corpus.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

#include "common/error.hpp"

namespace moeroute::metrics {

Corpus::Corpus(const trace::RunStore& store) : store_(&store) {
  const auto& cfg = store.config();
  n_layers_ = cfg.n_layers;
  slots_ = cfg.routed_experts_per_layer;
  n_experts_ = cfg.n_routed_experts;
  words_ = (static_cast<std::size_t>(n_experts_) + 63) / 64;

  std::unordered_map<const trace::ExpertId*, std::int32_t> slot_of;
  for (const auto& [id, n] : store.nodes()) {
    if (n.finish != trace::Finish::completed) continue;
    Node node;
    node.node_id = id;
    node.seq = store.expand(id);
    node.slot.reserve(node.seq.rows.size());
    for (const trace::ExpertId* row : node.seq.rows) {
      if (!row) {
        node.slot.push_back(kNoRow);
        continue;
      }
      auto [it, inserted] = slot_of.emplace(row, static_cast<std::int32_t>(slot_of.size()));
      if (inserted) {
        const std::size_t base = masks_.size();
        masks_.resize(base + static_cast<std::size_t>(n_layers_) * words_, 0);
        for (int l = 0; l < n_layers_; ++l) {
          std::uint64_t* m = masks_.data() + base + static_cast<std::size_t>(l) * words_;
          for (int s = 0; s < slots_; ++s) {
            const auto e = static_cast<std::size_t>(row[l * slots_ + s]);
            m[e / 64] |= 1ULL << (e % 64);
          }
          int pc = 0;
          for (std::size_t w = 0; w < words_; ++w) pc += std::popcount(m[w]);
          popcounts_.push_back(static_cast<std::uint8_t>(pc));
        }
      }
      node.slot.push_back(it->second);
    }
    nodes_.push_back(std::move(node));
  }
}

std::size_t Corpus::index_of(const std::string& node_id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node_id,
                             [](const Node& n, const std::string& id) { return n.node_id < id; });
  if (it == nodes_.end() || it->node_id != node_id) fail(ErrorCode::invalid_argument, "node not in corpus: " + node_id);
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::pair<int, int> Corpus::overlap(std::int32_t sa, std::int32_t sb, int layer) const {
  const auto ka = static_cast<std::size_t>(sa) * static_cast<std::size_t>(n_layers_) + static_cast<std::size_t>(layer);
  const auto kb = static_cast<std::size_t>(sb) * static_cast<std::size_t>(n_layers_) + static_cast<std::size_t>(layer);
  if (sa == sb) return {popcounts_[ka], popcounts_[ka]};
  const std::uint64_t* a = masks_.data() + ka * words_;
  const std::uint64_t* b = masks_.data() + kb * words_;
  int inter = 0;
  for (std::size_t w = 0; w < words_; ++w) inter += std::popcount(a[w] & b[w]);
  return {inter, popcounts_[ka] + popcounts_[kb] - inter};
}

}  // namespace moeroute::metrics
