// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/basic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace moeroute::metrics {

namespace {

std::vector<ExpertId> distinct(std::span<const ExpertId> s) {
  std::vector<ExpertId> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

long double log_choose(int n, int k) {
  return std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
         std::lgamma(static_cast<long double>(n - k) + 1);
}

void check_nk(int n, int k) {
  if (k < 1 || n < 1 || k > n) fail(ErrorCode::domain, "random baseline needs 1 <= k <= n");
}

}  // namespace

double jaccard(std::span<const ExpertId> a, std::span<const ExpertId> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::domain, "jaccard of an empty set");
  const auto x = distinct(a);
  const auto y = distinct(b);
  std::vector<ExpertId> inter;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(inter));
  const std::size_t uni = x.size() + y.size() - inter.size();
  return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

double random_baseline(int n, int k) {
  check_nk(n, k);
  const long double total = log_choose(n, k);
  long double sum = 0;
  for (int i = std::max(0, 2 * k - n); i <= k; ++i) {
    const long double p = std::exp(log_choose(k, i) + log_choose(n - k, k - i) - total);
    sum += p * static_cast<long double>(i) / static_cast<long double>(2 * k - i);
  }
  return static_cast<double>(sum);
}

double random_baseline_ratio(int n, int k) {
  check_nk(n, k);
  return static_cast<double>(k) / static_cast<double>(2 * n - k);
}

double random_baseline_mc(int n, int k, std::uint64_t draws, std::uint64_t seed) {
  check_nk(n, k);
  if (draws == 0) fail(ErrorCode::domain, "Monte-Carlo estimate needs at least one draw");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
  std::vector<std::uint64_t> mask(words);
  SplitMix rng(seed);
  auto draw = [&] {
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
      std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
  };
  double sum = 0.0;
  for (std::uint64_t d = 0; d < draws; ++d) {
    std::fill(mask.begin(), mask.end(), 0);
    draw();
    for (int i = 0; i < k; ++i) mask[perm[i] / 64] |= 1ULL << (perm[i] % 64);
    draw();
    int inter = 0;
    for (int i = 0; i < k; ++i) inter += (mask[perm[i] / 64] >> (perm[i] % 64)) & 1;
    sum += static_cast<double>(inter) / static_cast<double>(2 * k - inter);
  }
  return sum / static_cast<double>(draws);
}

double effective_experts(std::span<const std::uint64_t> counts) {
  long double total = 0;
  for (auto c : counts) total += static_cast<long double>(c);
  if (total <= 0) fail(ErrorCode::domain, "effective_experts of all-zero counts");
  long double h = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    const long double p = static_cast<long double>(c) / total;
    h -= p * std::log2(p);
  }
  return static_cast<double>(std::exp2(h));
}

}  // namespace moeroute::metrics
