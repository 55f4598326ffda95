// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "mock/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "common/hash.hpp"

namespace moeroute::mock {

std::vector<Candidate> apply_temperature(std::span<const Candidate> dist, double temperature) {
  std::vector<Candidate> out(dist.begin(), dist.end());
  double sum = 0.0;
  for (auto& c : out) {
    c.prob = c.prob > 0.0 ? std::pow(c.prob, 1.0 / temperature) : 0.0;
    sum += c.prob;
  }
  if (sum > 0.0) {
    for (auto& c : out) c.prob /= sum;
  }
  return out;
}

SynthStep synth_next(std::span<const Candidate> dist, const client::SamplingParams& sampling, double u, int top_n) {
  auto scaled = apply_temperature(dist, sampling.temperature);
  std::stable_sort(scaled.begin(), scaled.end(), [](const Candidate& a, const Candidate& b) { return a.prob > b.prob; });

  SynthStep step;
  step.top.assign(scaled.begin(), scaled.begin() + std::min<std::ptrdiff_t>(top_n, static_cast<std::ptrdiff_t>(scaled.size())));

  std::size_t keep = scaled.size();
  if (sampling.top_k > 0) keep = std::min(keep, static_cast<std::size_t>(sampling.top_k));
  double cum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    cum += scaled[i].prob;
    if (cum >= sampling.top_p) {
      keep = i + 1;
      break;
    }
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < keep; ++i) mass += scaled[i].prob;
  double target = u * mass;
  step.token = scaled[keep - 1].token;
  for (std::size_t i = 0; i < keep; ++i) {
    if (target < scaled[i].prob) {
      step.token = scaled[i].token;
      break;
    }
    target -= scaled[i].prob;
  }
  return step;
}

std::uint64_t context_hash(std::span<const TokenId> history, std::size_t pos, int window, std::uint64_t prompt_hash) {
  std::uint64_t h = 0x5bd1e9955bd1e995ULL;
  const auto w = static_cast<std::size_t>(window);
  if (pos < w) h = hash_combine(h, prompt_hash);
  for (std::size_t i = pos > w ? pos - w : 0; i < pos; ++i) {
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(history[i])));
  }
  return h;
}

RoutingModel::RoutingModel(const MockConfig& cfg)
    : seed_(cfg.seed),
      n_layers_(cfg.n_layers),
      slots_(cfg.slots),
      n_experts_(cfg.n_routed_experts),
      locality_(cfg.locality) {
  relabel_.resize(static_cast<std::size_t>(n_layers_));
  for (int l = 0; l < n_layers_; ++l) {
    auto& perm = relabel_[static_cast<std::size_t>(l)];
    perm.resize(static_cast<std::size_t>(n_experts_));
    std::iota(perm.begin(), perm.end(), 0);
    SplitMix rng(hash_combine(seed_ ^ 0x7065726dULL, static_cast<std::uint64_t>(l)));
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  }
}

void RoutingModel::gaussian_vector(std::uint64_t tag, std::uint64_t key, std::vector<double>& out) const {
  out.resize(static_cast<std::size_t>(n_experts_));
  const std::uint64_t base = hash_combine(hash_combine(seed_, tag), key);
  for (int e = 0; e < n_experts_; ++e) {
    const std::uint64_t h1 = splitmix64(base + 2 * static_cast<std::uint64_t>(e));
    const std::uint64_t h2 = splitmix64(base + 2 * static_cast<std::uint64_t>(e) + 1);
    const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    out[static_cast<std::size_t>(e)] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
}

void RoutingModel::top_experts(const std::vector<double>& g_tok, const std::vector<double>& g_ctx, double lambda,
                               int layer, std::span<trace::ExpertId> out) const {
  std::vector<std::pair<double, int>> scored(static_cast<std::size_t>(n_experts_));
  for (int e = 0; e < n_experts_; ++e) {
    const auto i = static_cast<std::size_t>(e);
    scored[i] = {(1.0 - lambda) * g_tok[i] + lambda * g_ctx[i], e};
  }
  auto by_score = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  std::partial_sort(scored.begin(), scored.begin() + slots_, scored.end(), by_score);
  const auto& perm = relabel_[static_cast<std::size_t>(layer)];
  for (int s = 0; s < slots_; ++s) out[static_cast<std::size_t>(s)] = perm[static_cast<std::size_t>(scored[static_cast<std::size_t>(s)].second)];
}

void RoutingModel::synth_routing(TokenId token, int layer, std::uint64_t ctx, std::span<trace::ExpertId> out) const {
  std::vector<double> g_tok, g_ctx;
  gaussian_vector(0x746f6bULL, static_cast<std::uint64_t>(static_cast<std::uint32_t>(token)), g_tok);
  gaussian_vector(0x637478ULL, ctx, g_ctx);
  top_experts(g_tok, g_ctx, locality_[static_cast<std::size_t>(layer)], layer, out);
}

void RoutingModel::route_position(TokenId token, std::uint64_t ctx, std::vector<trace::ExpertId>& out) const {
  std::vector<double> g_tok, g_ctx;
  gaussian_vector(0x746f6bULL, static_cast<std::uint64_t>(static_cast<std::uint32_t>(token)), g_tok);
  gaussian_vector(0x637478ULL, ctx, g_ctx);
  const std::size_t base = out.size();
  out.resize(base + static_cast<std::size_t>(n_layers_) * static_cast<std::size_t>(slots_));
  for (int l = 0; l < n_layers_; ++l) {
    std::span<trace::ExpertId> row(out.data() + base + static_cast<std::size_t>(l) * slots_, static_cast<std::size_t>(slots_));
    top_experts(g_tok, g_ctx, locality_[static_cast<std::size_t>(l)], l, row);
  }
}

}  // namespace moeroute::mock
