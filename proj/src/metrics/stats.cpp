// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "common/error.hpp"

namespace moeroute::metrics {

namespace {

struct Ranked {
  std::vector<long long> twice_rank;  // 2 * midrank, pooled order: a then b
  double tie_term = 0.0;              // sum of t^3 - t over tie groups
};

Ranked rank_pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  Ranked r;
  r.twice_rank.assign(pooled.size(), 0);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
    // ranks i+1 .. j share the midrank (i + 1 + j) / 2
    const auto twice = static_cast<long long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) r.twice_rank[order[k]] = twice;
    const double t = static_cast<double>(j - i);
    r.tie_term += t * t * t - t;
    i = j;
  }
  return r;
}

void check(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::domain, "Mann-Whitney U needs two non-empty samples");
}

double u_from_twice(long long twice_sum, std::size_t na) {
  return static_cast<double>(twice_sum) / 2.0 - static_cast<double>(na * (na + 1)) / 2.0;
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b) {
  check(a, b);
  const Ranked r = rank_pooled(a, b);
  const std::size_t na = a.size(), n = r.twice_rank.size();
  long long observed = 0;
  for (std::size_t i = 0; i < na; ++i) observed += r.twice_rank[i];

  // Rank sums are symmetric around na * (n + 1) / 2 in expectation; compare
  // absolute deviations in doubled units so the test stays in integers.
  const auto centre = static_cast<long long>(na * (n + 1));
  const long long dev = std::llabs(observed - centre);

  // Walk every na-subset of the pooled positions in lexicographic order.
  std::vector<std::size_t> idx(na);
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t total = 0, extreme = 0;
  while (true) {
    long long s = 0;
    for (auto i : idx) s += r.twice_rank[i];
    ++total;
    if (std::llabs(s - centre) >= dev) ++extreme;
    std::size_t k = na;
    while (k > 0 && idx[k - 1] == n - na + k - 1) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t m = k; m < na; ++m) idx[m] = idx[m - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double mann_whitney_approx_p(std::span<const double> a, std::span<const double> b) {
  check(a, b);
  const Ranked r = rank_pooled(a, b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double n = na + nb;
  long long twice = 0;
  for (std::size_t i = 0; i < a.size(); ++i) twice += r.twice_rank[i];
  const double u = u_from_twice(twice, a.size());
  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

UTest mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  check(a, b);
  const Ranked r = rank_pooled(a, b);
  long long twice = 0;
  for (std::size_t i = 0; i < a.size(); ++i) twice += r.twice_rank[i];
  UTest t;
  t.u = u_from_twice(twice, a.size());
  t.exact = a.size() + b.size() <= 12;
  t.p = t.exact ? mann_whitney_exact_p(a, b) : mann_whitney_approx_p(a, b);
  return t;
}

KindComparison compare_fa_gdn(std::span<const double> per_layer, const trace::LayerRule& rule) {
  std::vector<double> fa, gdn;
  for (std::size_t l = 0; l < per_layer.size(); ++l) {
    if (std::isnan(per_layer[l])) continue;
    (rule.is_full_attention(static_cast<int>(l)) ? fa : gdn).push_back(per_layer[l]);
  }
  if (fa.empty() || gdn.empty()) fail(ErrorCode::domain, "GDN/FA comparison needs values on both sides");
  KindComparison k;
  k.test = mann_whitney_u(gdn, fa);
  k.median_gdn = median(gdn);
  k.median_fa = median(fa);
  k.n_gdn = gdn.size();
  k.n_fa = fa.size();
  return k;
}

GdnFaReport gdn_fa_compare(std::span<const double> same_per_layer, std::span<const double> diff_per_layer,
                           const trace::LayerRule& rule) {
  return {compare_fa_gdn(same_per_layer, rule), compare_fa_gdn(diff_per_layer, rule)};
}

}  // namespace moeroute::metrics
