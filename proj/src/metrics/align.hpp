// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trace/types.hpp"

namespace moeroute::metrics {

enum class PairKind { same_tok, diff_tok };

struct PositionPair {
  std::size_t pos_a = 0;
  std::size_t pos_b = 0;
  PairKind kind = PairKind::same_tok;

  bool operator==(const PositionPair&) const = default;
};

struct MatchBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;

  bool operator==(const MatchBlock&) const = default;
};

struct Alignment {
  std::vector<PositionPair> pairs;  // ordered by pos_a
  double coverage = 0.0;
};

/// Longest common contiguous block in a[alo, ahi) x b[blo, bhi); among the
/// longest, the one starting earliest in a, then earliest in b. size 0 when
/// the ranges share no token.
MatchBlock longest_match(std::span<const trace::TokenId> a, std::span<const trace::TokenId> b, std::size_t alo,
                         std::size_t ahi, std::size_t blo, std::size_t bhi);

/// Recursive longest-block matching, blocks sorted by position.
std::vector<MatchBlock> matching_blocks(std::span<const trace::TokenId> a, std::span<const trace::TokenId> b);

/// Matched positions become same_tok pairs. Between consecutive blocks the two
/// unmatched gaps are paired index by index from the gap start, up to the
/// shorter gap, as diff_tok pairs. coverage = 2 * pairs / (|a| + |b|), 0 when
/// both are empty.
Alignment align_tokens(std::span<const trace::TokenId> a, std::span<const trace::TokenId> b);

}  // namespace moeroute::metrics
