// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "equiv/compile.hpp"
#include "metrics/basic.hpp"

namespace moeroute::metrics {

using equiv::LexClass;

OverlapHist::OverlapHist(int slots)
    : slots_(slots), cells_(static_cast<std::size_t>(slots + 1) * static_cast<std::size_t>(2 * slots + 1), 0) {}

void OverlapHist::add(int inter, int uni, std::uint64_t times) {
  if (inter < 0 || inter > slots_ || uni < 1 || uni > 2 * slots_) fail(ErrorCode::domain, "overlap outside histogram");
  cells_[static_cast<std::size_t>(inter) * static_cast<std::size_t>(2 * slots_ + 1) + static_cast<std::size_t>(uni)] +=
      times;
  count_ += times;
}

void OverlapHist::merge(const OverlapHist& other) {
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  count_ += other.count_;
}

double OverlapHist::mean() const {
  if (count_ == 0) return std::nan("");
  long double sum = 0;
  const std::size_t w = static_cast<std::size_t>(2 * slots_ + 1);
  for (std::size_t i = 0; i <= static_cast<std::size_t>(slots_); ++i)
    for (std::size_t u = 1; u < w; ++u)
      if (const auto c = cells_[i * w + u]) sum += static_cast<long double>(c) * i / u;
  return static_cast<double>(sum / count_);
}

namespace {

Cell cell_of(const OverlapHist& h, std::uint64_t divisor = 1) { return {h.mean(), h.count() / divisor}; }

double mean_skip_nan(const std::vector<double>& v) {
  double s = 0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      s += x;
      ++n;
    }
  return n ? s / static_cast<double>(n) : std::nan("");
}

}  // namespace

double LayerConditionTable::layer_mean(int column) const { return mean_skip_nan(column_values(column)); }

double LayerConditionTable::report_mean(int column) const {
  std::vector<double> v;
  for (int l : kReportLayers)
    if (l < n_layers) v.push_back(cells[static_cast<std::size_t>(l)][static_cast<std::size_t>(column)].mean);
  return mean_skip_nan(v);
}

double LayerConditionTable::all_layer_mean() const {
  std::vector<double> v;
  for (const auto& c : all) v.push_back(c.mean);
  return mean_skip_nan(v);
}

std::vector<double> LayerConditionTable::column_values(int column) const {
  std::vector<double> v;
  for (const auto& row : cells) v.push_back(row[static_cast<std::size_t>(column)].mean);
  return v;
}

std::vector<double> LayerConditionTable::kind_values(PairKind kind) const {
  std::vector<double> v;
  for (const auto& row : by_kind) v.push_back(row[kind == PairKind::same_tok ? 0 : 1].mean);
  return v;
}

int LayerConditionTable::argmax_layer(int column) const {
  int best = -1;
  double best_v = 0;
  for (int l = 0; l < n_layers; ++l) {
    const double v = cells[static_cast<std::size_t>(l)][static_cast<std::size_t>(column)].mean;
    if (std::isnan(v)) continue;
    if (best < 0 || v > best_v) {
      best = l;
      best_v = v;
    }
  }
  return best;
}

std::vector<NodePair> sample_pairs(const std::vector<std::vector<std::size_t>>& groups, const PairSampling& s) {
  std::vector<NodePair> out;
  SplitMix rng(hash_combine(s.seed, 0x70616972ULL));
  for (const auto& g : groups) {
    const std::size_t m = g.size();
    if (m < 2) continue;
    if (m <= s.within_all_max) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) out.push_back({g[i], g[j], Condition::within});
    } else {
      for (std::size_t k = 0; k < s.within_per_member * m; ++k) {
        const auto i = rng.below(m);
        auto j = rng.below(m - 1);
        if (j >= i) ++j;
        out.push_back({g[i], g[j], Condition::within});
      }
    }
  }
  std::size_t total = 0;
  for (std::size_t x = 0; x < groups.size(); ++x)
    for (std::size_t y = x + 1; y < groups.size(); ++y) total += groups[x].size() * groups[y].size();
  if (total <= s.between_cap) {
    for (std::size_t x = 0; x < groups.size(); ++x)
      for (std::size_t y = x + 1; y < groups.size(); ++y)
        for (auto a : groups[x])
          for (auto b : groups[y]) out.push_back({a, b, Condition::between});
  } else {
    std::vector<std::pair<std::size_t, std::size_t>> gp;
    for (std::size_t x = 0; x < groups.size(); ++x)
      for (std::size_t y = x + 1; y < groups.size(); ++y)
        if (!groups[x].empty() && !groups[y].empty()) gp.emplace_back(x, y);
    for (std::size_t k = 0; k < s.between_cap && !gp.empty(); ++k) {
      const auto [x, y] = gp[rng.below(gp.size())];
      out.push_back({groups[x][rng.below(groups[x].size())], groups[y][rng.below(groups[y].size())],
                     Condition::between});
    }
  }
  return out;
}

TokenClasses token_classes(const Corpus& corpus, const std::string& stop_token) {
  TokenClasses tc;
  for (const auto& node : corpus.nodes()) {
    std::vector<std::optional<LexClass>> cls;
    try {
      const std::string text = node.seq.text();
      const auto code = equiv::extract_code(text, stop_token);
      const auto lex = equiv::lex_c(code.source);
      const std::size_t lo = code.offset, hi = code.offset + code.source.size();
      std::size_t pos = 0;
      for (const auto& t : node.seq.token_texts) {
        const std::size_t b = std::max(pos, lo), e = std::min(pos + t.size(), hi);
        cls.push_back(e > b ? equiv::span_class(lex, b - lo, e - lo) : std::nullopt);
        pos += t.size();
      }
    } catch (const Error&) {
      cls.clear();
      ++tc.skipped;
    }
    tc.classes.push_back(std::move(cls));
  }
  return tc;
}

namespace {

constexpr std::size_t kClassCount = std::size(equiv::kAllLexClasses);

struct Accum {
  std::vector<OverlapHist> layer;  // [layer * 4 + column]
  std::vector<OverlapHist> types;  // [class * 2 + kind]

  Accum(int n_layers, int slots)
      : layer(static_cast<std::size_t>(n_layers) * 4, OverlapHist(slots)), types(kClassCount * 2, OverlapHist(slots)) {}

  void merge(const Accum& o) {
    for (std::size_t i = 0; i < layer.size(); ++i) layer[i].merge(o.layer[i]);
    for (std::size_t i = 0; i < types.size(); ++i) types[i].merge(o.types[i]);
  }
};

void accumulate(const Corpus& corpus, const NodePair& np, const TokenClasses* classes, Accum& acc, double& coverage) {
  const auto& A = corpus.nodes()[np.a];
  const auto& B = corpus.nodes()[np.b];
  const Alignment al = align_tokens(A.seq.token_ids, B.seq.token_ids);
  coverage = al.coverage;
  const int L = corpus.n_layers();
  const std::vector<std::optional<LexClass>>* ca = nullptr;
  if (classes && np.condition == Condition::within && !classes->classes[np.a].empty()) ca = &classes->classes[np.a];
  for (const auto& pp : al.pairs) {
    const std::int32_t sa = A.slot[pp.pos_a], sb = B.slot[pp.pos_b];
    if (sa == Corpus::kNoRow || sb == Corpus::kNoRow) continue;
    const int kind = pp.kind == PairKind::same_tok ? 0 : 1;
    const std::size_t column = (np.condition == Condition::within ? 0 : 2) + static_cast<std::size_t>(kind);
    OverlapHist* th = nullptr;
    if (ca && (*ca)[pp.pos_a]) th = &acc.types[static_cast<std::size_t>(*(*ca)[pp.pos_a]) * 2 + kind];
    for (int l = 0; l < L; ++l) {
      const auto [inter, uni] = corpus.overlap(sa, sb, l);
      acc.layer[static_cast<std::size_t>(l) * 4 + column].add(inter, uni);
      if (th) th->add(inter, uni);
    }
  }
}

}  // namespace

PairStats compute_pair_stats(const Corpus& corpus, const std::vector<std::vector<std::size_t>>& groups,
                             const PairSampling& sampling, const TokenClasses* classes) {
  if (corpus.nodes().size() < 2) fail(ErrorCode::insufficient_data, "need at least two completed nodes");
  const int L = corpus.n_layers();
  const int S = corpus.slots();
  const auto pairs = sample_pairs(groups, sampling);

  std::vector<double> coverage(pairs.size(), 0.0);
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, pairs.size())));
  std::vector<Accum> partial(jobs, Accum(L, S));
  std::atomic<std::size_t> next{0};
  auto work = [&](unsigned t) {
    for (std::size_t i = next++; i < pairs.size(); i = next++) accumulate(corpus, pairs[i], classes, partial[t], coverage[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();
  Accum acc(L, S);
  for (const auto& p : partial) acc.merge(p);

  PairStats out;
  auto& tab = out.layers;
  tab.n_layers = L;
  tab.cells.resize(static_cast<std::size_t>(L));
  tab.by_kind.resize(static_cast<std::size_t>(L));
  tab.all.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const auto li = static_cast<std::size_t>(l);
    OverlapHist all(S), same(S), diff(S);
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& h = acc.layer[li * 4 + c];
      tab.cells[li][c] = cell_of(h);
      all.merge(h);
      (c % 2 == 0 ? same : diff).merge(h);
    }
    tab.all[li] = cell_of(all);
    tab.by_kind[li] = {cell_of(same), cell_of(diff)};
  }
  double cw = 0, cb = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].condition == Condition::within) {
      ++tab.within_node_pairs;
      cw += coverage[i];
    } else {
      ++tab.between_node_pairs;
      cb += coverage[i];
    }
  }
  if (tab.within_node_pairs) tab.within_coverage = cw / static_cast<double>(tab.within_node_pairs);
  if (tab.between_node_pairs) tab.between_coverage = cb / static_cast<double>(tab.between_node_pairs);

  if (classes) {
    out.token_type_skipped_nodes = classes->skipped;
    for (std::size_t c = 0; c < kClassCount; ++c) {
      out.token_types.push_back({equiv::kAllLexClasses[c], cell_of(acc.types[c * 2], static_cast<std::uint64_t>(L)),
                                 cell_of(acc.types[c * 2 + 1], static_cast<std::uint64_t>(L))});
    }
  }
  return out;
}

LayerConditionTable layer_condition_stats(const Corpus& corpus, const std::vector<std::vector<std::size_t>>& groups,
                                          const PairSampling& sampling) {
  return compute_pair_stats(corpus, groups, sampling).layers;
}

std::vector<TokenTypeRow> token_type_stats(const Corpus& corpus, const std::vector<std::vector<std::size_t>>& groups,
                                           const TokenClasses& classes, const PairSampling& sampling) {
  return compute_pair_stats(corpus, groups, sampling, &classes).token_types;
}

CoactMatrix coactivation_matrix(const trace::RunStore& store, int layer) {
  const auto& cfg = store.config();
  if (layer < 0 || layer >= cfg.n_layers) fail(ErrorCode::domain, "layer out of range");
  CoactMatrix m;
  m.layer = layer;
  m.n = cfg.n_routed_experts;
  const auto n = static_cast<std::size_t>(m.n);
  m.counts.assign(n * n, 0);
  m.activations.assign(n, 0);
  for (const auto& [id, node] : store.nodes()) {
    if (node.finish != trace::Finish::completed) continue;
    for (std::size_t t = 0; t < node.trace.n_tokens(); ++t) {
      const auto row = node.trace.row(t, layer);
      ++m.positions;
      for (std::size_t i = 0; i < row.size(); ++i) {
        const auto a = static_cast<std::size_t>(row[i]);
        ++m.activations[a];
        for (std::size_t j = i + 1; j < row.size(); ++j) {
          const auto b = static_cast<std::size_t>(row[j]);
          ++m.counts[a * n + b];
          ++m.counts[b * n + a];
        }
      }
    }
  }
  m.order.resize(n);
  std::iota(m.order.begin(), m.order.end(), 0);
  std::stable_sort(m.order.begin(), m.order.end(), [&](int x, int y) {
    return m.activations[static_cast<std::size_t>(x)] > m.activations[static_cast<std::size_t>(y)];
  });
  std::uint64_t zero = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++total;
      if (m.counts[i * n + j] == 0) ++zero;
    }
  m.zero_pair_fraction = total ? static_cast<double>(zero) / static_cast<double>(total) : 0.0;
  return m;
}

std::vector<double> effective_experts_per_layer(const trace::RunStore& store) {
  const auto& cfg = store.config();
  const auto L = static_cast<std::size_t>(cfg.n_layers);
  const auto n = static_cast<std::size_t>(cfg.n_routed_experts);
  std::vector<std::uint64_t> counts(L * n, 0);
  for (const auto& [id, node] : store.nodes()) {
    if (node.finish != trace::Finish::completed) continue;
    for (std::size_t t = 0; t < node.trace.n_tokens(); ++t)
      for (std::size_t l = 0; l < L; ++l)
        for (auto e : node.trace.row(t, static_cast<int>(l))) ++counts[l * n + static_cast<std::size_t>(e)];
  }
  std::vector<double> out;
  for (std::size_t l = 0; l < L; ++l) {
    std::span<const std::uint64_t> c(counts.data() + l * n, n);
    const bool any = std::any_of(c.begin(), c.end(), [](auto v) { return v != 0; });
    out.push_back(any ? effective_experts(c) : std::nan(""));
  }
  return out;
}

DecayCurve decay_curve(const trace::RunStore& store, const std::vector<trace::SiblingPair>& pairs, int bin_width) {
  if (bin_width < 1) fail(ErrorCode::domain, "bin width must be positive");
  const auto& cfg = store.config();
  const int L = cfg.n_layers;
  const int S = cfg.routed_experts_per_layer;
  DecayCurve curve;
  curve.bin_width = bin_width;
  std::vector<std::array<OverlapHist, 2>> bins;
  std::vector<std::array<OverlapHist, 2>> layers(static_cast<std::size_t>(L), {OverlapHist(S), OverlapHist(S)});
  auto inter_of = [](std::span<const trace::ExpertId> a, std::span<const trace::ExpertId> b) {
    int k = 0;
    for (auto x : a)
      for (auto y : b) k += x == y;
    return k;
  };
  for (const auto& sp : pairs) {
    const auto& A = store.node(sp.node_a);
    const auto& B = store.node(sp.node_b);
    if (A.finish != trace::Finish::completed || B.finish != trace::Finish::completed) continue;
    const bool parent_child = B.parent_id && *B.parent_id == A.node_id;
    const std::size_t oa = parent_child ? static_cast<std::size_t>(sp.fork_step) + 1 : 0;
    ++curve.pairs;
    for (std::size_t k = 0; oa + k < A.gen_token_ids.size() && k < B.gen_token_ids.size(); ++k) {
      const std::size_t bin = k / static_cast<std::size_t>(bin_width);
      if (bins.size() <= bin) bins.resize(bin + 1, {OverlapHist(S), OverlapHist(S)});
      const int kind = A.gen_token_ids[oa + k] == B.gen_token_ids[k] ? 0 : 1;
      for (int l = 0; l < L; ++l) {
        const auto ra = A.trace.row(oa + k, l), rb = B.trace.row(k, l);
        const int inter = inter_of(ra, rb);
        const int uni = static_cast<int>(ra.size() + rb.size()) - inter;
        bins[bin][static_cast<std::size_t>(kind)].add(inter, uni);
        layers[static_cast<std::size_t>(l)][static_cast<std::size_t>(kind)].add(inter, uni);
      }
    }
  }
  const auto div = static_cast<std::uint64_t>(L);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    DecayBin db;
    db.offset_lo = b * static_cast<std::size_t>(bin_width);
    db.same = cell_of(bins[b][0], div);
    db.diff = cell_of(bins[b][1], div);
    const auto tot = db.same.n + db.diff.n;
    if (tot) db.same_ratio = static_cast<double>(db.same.n) / static_cast<double>(tot);
    curve.bins.push_back(db);
  }
  for (const auto& l : layers) curve.by_layer.push_back({cell_of(l[0]), cell_of(l[1])});
  return curve;
}

}  // namespace moeroute::metrics
