// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trace/types.hpp"

namespace moeroute::metrics {

using trace::ExpertId;

/// |A ∩ B| / |A ∪ B| over the distinct IDs of each input. Throws
/// Error(domain) if either set is empty.
double jaccard(std::span<const ExpertId> a, std::span<const ExpertId> b);

/// Expected Jaccard of two independent uniform k-subsets of n experts, by the
/// exact hypergeometric sum. Throws Error(domain) unless 1 <= k <= n.
double random_baseline(int n_experts, int k);

/// k / (2n - k): expected intersection over expected union. A first-order
/// approximation of random_baseline.
double random_baseline_ratio(int n_experts, int k);

/// Monte-Carlo estimate of random_baseline from `draws` pairs of subsets.
double random_baseline_mc(int n_experts, int k, std::uint64_t draws, std::uint64_t seed);

/// 2^H of the normalized count distribution, H in bits. Throws Error(domain)
/// if every count is zero.
double effective_experts(std::span<const std::uint64_t> counts);

}  // namespace moeroute::metrics
