// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trace/types.hpp"

namespace moeroute::metrics {

struct UTest {
  double u = 0.0;  // U of the first sample, midranks for ties
  double p = 1.0;  // two-sided
  bool exact = false;
};

/// Mann-Whitney U. Exact enumeration when the samples total at most 12
/// values, otherwise the tie-corrected normal approximation with continuity
/// correction. Throws Error(domain) on an empty sample.
UTest mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Two-sided p by enumerating every split of the pooled midranks: the share
/// of splits whose rank sum lies at least as far from its mean as observed.
double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);
double mann_whitney_approx_p(std::span<const double> a, std::span<const double> b);

struct KindComparison {
  UTest test;
  double median_gdn = 0.0;
  double median_fa = 0.0;
  std::size_t n_gdn = 0;
  std::size_t n_fa = 0;
};

/// Splits per-layer values into full-attention layers (by `rule`) and the
/// rest, then compares them. NaN entries are dropped. Throws Error(domain)
/// when either side is empty.
KindComparison compare_fa_gdn(std::span<const double> per_layer, const trace::LayerRule& rule);

struct GdnFaReport {
  KindComparison same_tok;
  KindComparison diff_tok;
};

GdnFaReport gdn_fa_compare(std::span<const double> same_per_layer, std::span<const double> diff_per_layer,
                           const trace::LayerRule& rule);

double median(std::vector<double> v);

}  // namespace moeroute::metrics
