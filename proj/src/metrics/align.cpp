// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/align.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_map>

namespace moeroute::metrics {

namespace {

using trace::TokenId;

class Matcher {
 public:
  Matcher(std::span<const TokenId> a, std::span<const TokenId> b) : a_(a), b_(b), len_(b.size() + 1, 0) {
    for (std::size_t j = 0; j < b.size(); ++j) b2j_[b[j]].push_back(j);
  }

  MatchBlock find(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
    // len_[j + 1] holds the length of the match ending at (i - 1, j); prev
    // lists the entries set by the previous row.
    MatchBlock best{alo, blo, 0};
    std::vector<std::pair<std::size_t, std::size_t>> row, prev;
    for (std::size_t i = alo; i < ahi; ++i) {
      row.clear();
      auto it = b2j_.find(a_[i]);
      if (it != b2j_.end()) {
        const auto& js = it->second;
        for (auto jt = std::lower_bound(js.begin(), js.end(), blo); jt != js.end() && *jt < bhi; ++jt) {
          const std::size_t j = *jt;
          const std::size_t k = (j > blo ? len_[j] : 0) + 1;
          row.emplace_back(j + 1, k);
          if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
        }
      }
      for (auto [j, k] : prev) len_[j] = 0;
      for (auto [j, k] : row) len_[j] = k;
      std::swap(prev, row);
    }
    for (auto [j, k] : prev) len_[j] = 0;
    return best;
  }

 private:
  std::span<const TokenId> a_, b_;
  std::unordered_map<TokenId, std::vector<std::size_t>> b2j_;
  std::vector<std::size_t> len_;
};

}  // namespace

MatchBlock longest_match(std::span<const TokenId> a, std::span<const TokenId> b, std::size_t alo, std::size_t ahi,
                         std::size_t blo, std::size_t bhi) {
  return Matcher(a, b).find(alo, ahi, blo, bhi);
}

std::vector<MatchBlock> matching_blocks(std::span<const TokenId> a, std::span<const TokenId> b) {
  Matcher m(a, b);
  std::vector<MatchBlock> blocks;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> todo{{0, a.size(), 0, b.size()}};
  while (!todo.empty()) {
    auto [alo, ahi, blo, bhi] = todo.back();
    todo.pop_back();
    if (alo >= ahi || blo >= bhi) continue;
    const MatchBlock mb = m.find(alo, ahi, blo, bhi);
    if (mb.size == 0) continue;
    blocks.push_back(mb);
    todo.emplace_back(alo, mb.a, blo, mb.b);
    todo.emplace_back(mb.a + mb.size, ahi, mb.b + mb.size, bhi);
  }
  std::sort(blocks.begin(), blocks.end(), [](const MatchBlock& x, const MatchBlock& y) { return x.a < y.a; });
  return blocks;
}

Alignment align_tokens(std::span<const TokenId> a, std::span<const TokenId> b) {
  Alignment out;
  auto blocks = matching_blocks(a, b);
  blocks.push_back({a.size(), b.size(), 0});
  std::size_t ia = 0, ib = 0;
  for (const auto& mb : blocks) {
    const std::size_t gap = std::min(mb.a - ia, mb.b - ib);
    for (std::size_t g = 0; g < gap; ++g) out.pairs.push_back({ia + g, ib + g, PairKind::diff_tok});
    for (std::size_t k = 0; k < mb.size; ++k) out.pairs.push_back({mb.a + k, mb.b + k, PairKind::same_tok});
    ia = mb.a + mb.size;
    ib = mb.b + mb.size;
  }
  const std::size_t total = a.size() + b.size();
  out.coverage = total == 0 ? 0.0 : 2.0 * static_cast<double>(out.pairs.size()) / static_cast<double>(total);
  return out;
}

}  // namespace moeroute::metrics
