// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "report/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/text.hpp"
#include "equiv/groups.hpp"
#include "metrics/basic.hpp"
#include "metrics/stats.hpp"
#include "report/svg.hpp"
#include "trace/run_store.hpp"

namespace moeroute::report {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kDigits = 6;

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

class Writer {
 public:
  Writer(fs::path dir, std::string tag) : dir_(std::move(dir)), tag_(std::move(tag)) {}

  void csv(const std::string& name, const std::string& body) { file(name, tag_ + body); }
  void file(const std::string& name, const std::string& body) {
    write_file(dir_ / name, body);
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::string tag_;
  std::vector<std::string> files_;
};

std::string cell_csv(const metrics::Cell& c) { return fixed(c.mean, kDigits) + "," + std::to_string(c.n); }

json cell_json(const metrics::Cell& c) { return {{"mean", number_or_null(c.mean)}, {"n", c.n}}; }

json comparison_json(const metrics::KindComparison& k) {
  return {{"U", k.test.u},          {"p", k.test.p},      {"exact", k.test.exact}, {"median_gdn", k.median_gdn},
          {"median_fa", k.median_fa}, {"n_gdn", k.n_gdn}, {"n_fa", k.n_fa}};
}

std::string gdn_fa_csv(const metrics::GdnFaReport& r) {
  std::string out = "kind,U,p,exact,median_gdn,median_fa,n_gdn,n_fa\n";
  auto row = [&](const char* name, const metrics::KindComparison& k) {
    out += std::string(name) + "," + fixed(k.test.u, 1) + "," + fixed(k.test.p, kDigits) + "," +
           (k.test.exact ? "1" : "0") + "," + fixed(k.median_gdn, kDigits) + "," + fixed(k.median_fa, kDigits) + "," +
           std::to_string(k.n_gdn) + "," + std::to_string(k.n_fa) + "\n";
  };
  row("same_tok", r.same_tok);
  row("diff_tok", r.diff_tok);
  return out;
}

struct CompileSummary {
  std::size_t attempted = 0;
  std::size_t no_code = 0;
  std::size_t failed = 0;
  std::size_t with_preamble = 0;
  std::vector<std::string> status;  // per corpus node
  std::vector<std::string> group_of;
};

}  // namespace

AnalyzeResult analyze(const AnalyzeOptions& opts) {
  const trace::RunStore store = trace::RunStore::load(opts.store_dir);
  const auto& cfg = store.config();
  const metrics::Corpus corpus(store);
  if (corpus.nodes().empty()) fail(ErrorCode::insufficient_data, "store has no completed nodes");
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const std::string chash = trace::config_hash(cfg);

  fs::create_directories(opts.out_dir);
  Writer w(opts.out_dir, "# seed=" + std::to_string(seed) + " config_hash=" + chash + "\n");

  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["seed"] = seed;
  report["config_hash"] = chash;
  report["root_id"] = store.root_id().value_or("");
  const auto& man = store.manifest();
  report["run"] = {{"nodes", store.size()},
                   {"completed", man.completed},
                   {"truncated", man.truncated},
                   {"errors", man.errors},
                   {"forks_scheduled", man.forks_scheduled},
                   {"retokenized", man.retokenized},
                   {"timed_out", man.timed_out},
                   {"corpus_nodes", corpus.nodes().size()}};
  const double baseline = metrics::random_baseline(cfg.n_routed_experts, cfg.routed_experts_per_layer);
  report["random_baseline"] = {
      {"exact", baseline},
      {"ratio_of_expectations", metrics::random_baseline_ratio(cfg.n_routed_experts, cfg.routed_experts_per_layer)}};

  std::optional<metrics::PairStats> stats;
  if (!opts.skip_compile) {
    CompileSummary cs;
    std::vector<std::string> sources;
    std::vector<std::size_t> source_node;
    cs.status.assign(corpus.nodes().size(), "");
    cs.group_of.assign(corpus.nodes().size(), "");
    for (std::size_t i = 0; i < corpus.nodes().size(); ++i) {
      try {
        sources.push_back(equiv::extract_code(corpus.nodes()[i].seq.text(), cfg.stop_token).source);
        source_node.push_back(i);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::no_code) throw;
        ++cs.no_code;
        cs.status[i] = "no_code";
      }
    }
    cs.attempted = sources.size();
    const auto results = equiv::compile_all(sources, opts.compile, opts.compile_jobs);
    std::vector<equiv::CompiledUnit> units;
    std::vector<std::size_t> unit_node;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const std::size_t i = source_node[k];
      if (!results[k].ok) {
        ++cs.failed;
        cs.status[i] = "failed";
        continue;
      }
      if (results[k].used_preamble) ++cs.with_preamble;
      cs.status[i] = results[k].used_preamble ? "compiled_with_preamble" : "compiled";
      units.push_back({corpus.nodes()[i].node_id, sources[k], equiv::normalize_asm(results[k].assembly)});
      unit_node.push_back(i);
    }
    if (units.size() < 2) fail(ErrorCode::insufficient_data, "fewer than two nodes compiled");
    const equiv::Grouping grouping = equiv::group_by_asm(units);

    std::vector<std::vector<std::size_t>> groups;
    for (const auto& g : grouping.groups) {
      std::vector<std::size_t> members;
      for (std::size_t u : g.unit_indices) {
        members.push_back(unit_node[u]);
        cs.group_of[unit_node[u]] = g.group_id;
      }
      groups.push_back(std::move(members));
    }

    const std::string target = equiv::compiler_target(opts.compile);
    report["target"] = target;
    report["compile"] = {{"attempted", cs.attempted},
                         {"no_code", cs.no_code},
                         {"compiled", units.size()},
                         {"failed", cs.failed},
                         {"with_preamble", cs.with_preamble},
                         {"compile_rate", static_cast<double>(units.size()) / static_cast<double>(corpus.nodes().size())}};

    std::string compile_csv = "node_id,status,group_id\n";
    for (std::size_t i = 0; i < corpus.nodes().size(); ++i)
      compile_csv += corpus.nodes()[i].node_id + "," + cs.status[i] + "," + cs.group_of[i] + "\n";
    w.csv("compile.csv", compile_csv);
    w.csv("groups.csv", equiv::groups_csv(grouping));

    std::string dist = "rank,size,cumulative_fraction\n";
    std::vector<double> sizes;
    std::size_t cum = 0;
    for (std::size_t r = 0; r < grouping.groups.size(); ++r) {
      const std::size_t sz = grouping.groups[r].members.size();
      cum += sz;
      sizes.push_back(static_cast<double>(sz));
      dist += std::to_string(r + 1) + "," + std::to_string(sz) + "," +
              fixed(static_cast<double>(cum) / static_cast<double>(grouping.compiled), kDigits) + "\n";
    }
    w.csv("group_distribution.csv", dist);
    w.file("group_distribution.svg", bar_chart_svg("O0-equivalent group sizes", "group rank", "members", sizes));

    std::size_t diff_c = 0, diff_b = 0, diff_e = 0;
    json top = json::array();
    for (std::size_t r = 0; r < grouping.groups.size(); ++r) {
      const auto& g = grouping.groups[r];
      diff_c += g.diff.comment_lines;
      diff_b += g.diff.blank_lines;
      diff_e += g.diff.exec_lines;
      if (r < 10)
        top.push_back({{"group_id", g.group_id},
                       {"size", g.members.size()},
                       {"comment_fraction", g.diff.comment_fraction},
                       {"blank_fraction", g.diff.blank_fraction},
                       {"exec_fraction", g.diff.exec_fraction}});
    }
    const double diff_total = static_cast<double>(diff_c + diff_b + diff_e);
    report["groups"] = {
        {"count", grouping.groups.size()},
        {"singletons", grouping.singletons},
        {"singleton_fraction", grouping.singleton_fraction()},
        {"largest", top},
        {"differing_lines",
         {{"comment", diff_c},
          {"blank", diff_b},
          {"exec", diff_e},
          {"comment_or_blank_fraction",
           diff_total > 0 ? json(static_cast<double>(diff_c + diff_b) / diff_total) : json(nullptr)}}}};

    metrics::PairSampling sampling;
    sampling.between_cap = opts.pair_cap;
    sampling.seed = seed;
    const metrics::TokenClasses classes = metrics::token_classes(corpus, cfg.stop_token);
    stats = metrics::compute_pair_stats(corpus, groups, sampling, &classes);
    const auto& tab = stats->layers;

    std::string lc = "layer,fa";
    for (const char* c : metrics::kColumnNames) lc += std::string(",") + c + "," + c + "_n";
    lc += ",all,all_n\n";
    json layers = json::array();
    for (int l = 0; l < tab.n_layers; ++l) {
      const auto li = static_cast<std::size_t>(l);
      lc += std::to_string(l) + "," + (cfg.fa_layer_rule.is_full_attention(l) ? "1" : "0");
      json row = {{"layer", l}};
      for (std::size_t c = 0; c < 4; ++c) {
        lc += "," + cell_csv(tab.cells[li][c]);
        row[metrics::kColumnNames[c]] = cell_json(tab.cells[li][c]);
      }
      lc += "," + cell_csv(tab.all[li]) + "\n";
      row["all"] = cell_json(tab.all[li]);
      layers.push_back(row);
    }
    w.csv("layer_conditions.csv", lc);

    std::string t1 = "row";
    for (const char* c : metrics::kColumnNames) t1 += std::string(",") + c;
    t1 += ",all\n";
    for (int l : metrics::kReportLayers) {
      if (l >= tab.n_layers) continue;
      t1 += "layer_" + std::to_string(l);
      for (std::size_t c = 0; c < 4; ++c) t1 += "," + fixed(tab.cells[static_cast<std::size_t>(l)][c].mean, kDigits);
      t1 += "," + fixed(tab.all[static_cast<std::size_t>(l)].mean, kDigits) + "\n";
    }
    json all_mean, report_mean, argmax;
    t1 += "mean_all_layers";
    for (int c = 0; c < 4; ++c) {
      t1 += "," + fixed(tab.layer_mean(c), kDigits);
      all_mean[metrics::kColumnNames[c]] = number_or_null(tab.layer_mean(c));
      report_mean[metrics::kColumnNames[c]] = number_or_null(tab.report_mean(c));
      argmax[metrics::kColumnNames[c]] = tab.argmax_layer(c);
    }
    t1 += "," + fixed(tab.all_layer_mean(), kDigits) + "\nmean_report_layers";
    for (int c = 0; c < 4; ++c) t1 += "," + fixed(tab.report_mean(c), kDigits);
    std::vector<double> report_all;
    for (int l : metrics::kReportLayers)
      if (l < tab.n_layers && !std::isnan(tab.all[static_cast<std::size_t>(l)].mean))
        report_all.push_back(tab.all[static_cast<std::size_t>(l)].mean);
    const double report_all_mean =
        report_all.empty() ? std::nan("")
                           : std::accumulate(report_all.begin(), report_all.end(), 0.0) / static_cast<double>(report_all.size());
    t1 += "," + fixed(report_all_mean, kDigits) + "\n";
    w.csv("condition_summary.csv", t1);
    all_mean["all"] = number_or_null(tab.all_layer_mean());
    report_mean["all"] = number_or_null(report_all_mean);
    const auto first_max = [](const std::vector<double>& v) {
      int best = -1;
      for (std::size_t l = 0; l < v.size(); ++l)
        if (!std::isnan(v[l]) && (best < 0 || v[l] > v[static_cast<std::size_t>(best)])) best = static_cast<int>(l);
      return best;
    };
    argmax["same_tok"] = first_max(tab.kind_values(metrics::PairKind::same_tok));
    argmax["diff_tok"] = first_max(tab.kind_values(metrics::PairKind::diff_tok));

    report["layer_conditions"] = {{"layers", layers},
                                  {"all_layer_mean", all_mean},
                                  {"report_layer_mean", report_mean},
                                  {"argmax_layer", argmax},
                                  {"within_node_pairs", tab.within_node_pairs},
                                  {"between_node_pairs", tab.between_node_pairs},
                                  {"within_coverage", number_or_null(tab.within_coverage)},
                                  {"between_coverage", number_or_null(tab.between_coverage)}};

    std::vector<Series> curves;
    std::vector<double> xs;
    for (int l = 0; l < tab.n_layers; ++l) xs.push_back(l);
    for (int c = 0; c < 4; ++c) curves.push_back({metrics::kColumnNames[c], xs, tab.column_values(c)});
    std::vector<double> all_v;
    for (const auto& cell : tab.all) all_v.push_back(cell.mean);
    curves.push_back({"All pairs", xs, all_v});
    w.file("layer_curves.svg", line_chart_svg("Layer-wise Jaccard similarity", "layer", "Jaccard", curves));

    std::string tt = "class,same_tok_J,same_tok_n,diff_tok_J,diff_tok_n\n";
    json tj = json::array();
    for (const auto& row : stats->token_types) {
      tt += equiv::to_string(row.cls) + "," + cell_csv(row.same) + "," + cell_csv(row.diff) + "\n";
      tj.push_back({{"class", equiv::to_string(row.cls)}, {"same_tok", cell_json(row.same)}, {"diff_tok", cell_json(row.diff)}});
    }
    w.csv("token_types.csv", tt);
    report["token_types"] = {{"rows", tj}, {"skipped_nodes", stats->token_type_skipped_nodes}};
  } else {
    report["target"] = nullptr;
    report["compile"] = nullptr;
    report["groups"] = nullptr;
    report["layer_conditions"] = nullptr;
    report["token_types"] = nullptr;
  }

  const auto sib = store.extract_sibling_pairs();
  const metrics::DecayCurve decay = metrics::decay_curve(store, sib, opts.bin_width);
  std::string dc = "bin,offset_lo,J_same,n_same,J_diff,n_diff,same_ratio\n";
  json bins = json::array();
  std::vector<double> bx, bsame, bdiff, bratio;
  for (std::size_t b = 0; b < decay.bins.size(); ++b) {
    const auto& d = decay.bins[b];
    dc += std::to_string(b) + "," + std::to_string(d.offset_lo) + "," + cell_csv(d.same) + "," + cell_csv(d.diff) + "," +
          fixed(d.same_ratio, kDigits) + "\n";
    bins.push_back({{"offset_lo", d.offset_lo},
                    {"same_tok", cell_json(d.same)},
                    {"diff_tok", cell_json(d.diff)},
                    {"same_ratio", number_or_null(d.same_ratio)}});
    bx.push_back(static_cast<double>(d.offset_lo));
    bsame.push_back(d.same.mean);
    bdiff.push_back(d.diff.mean);
    bratio.push_back(d.same_ratio);
  }
  w.csv("decay.csv", dc);
  w.file("decay.svg", line_chart_svg("Routing overlap after fork", "steps after fork", "Jaccard / ratio",
                                     {{"same-tok J", bx, bsame}, {"diff-tok J", bx, bdiff}, {"same-token ratio", bx, bratio}}));
  report["decay"] = {{"bin_width", decay.bin_width}, {"pairs", decay.pairs}, {"bins", bins}};

  std::string sl = "layer,same,same_n,diff,diff_n\n";
  std::vector<double> sib_same, sib_diff;
  for (std::size_t l = 0; l < decay.by_layer.size(); ++l) {
    sl += std::to_string(l) + "," + cell_csv(decay.by_layer[l][0]) + "," + cell_csv(decay.by_layer[l][1]) + "\n";
    sib_same.push_back(decay.by_layer[l][0].mean);
    sib_diff.push_back(decay.by_layer[l][1].mean);
  }
  w.csv("sibling_layers.csv", sl);

  // Per-layer values for the attention-type test and the default
  // co-activation layer: aligned pairs when available, siblings otherwise.
  std::vector<double> kind_same = stats ? stats->layers.kind_values(metrics::PairKind::same_tok) : sib_same;
  std::vector<double> kind_diff = stats ? stats->layers.kind_values(metrics::PairKind::diff_tok) : sib_diff;
  try {
    const auto g = metrics::gdn_fa_compare(kind_same, kind_diff, cfg.fa_layer_rule);
    w.csv("gdn_fa.csv", gdn_fa_csv(g));
    report["gdn_fa"] = {{"basis", stats ? "aligned_pairs" : "sibling_pairs"},
                        {"same_tok", comparison_json(g.same_tok)},
                        {"diff_tok", comparison_json(g.diff_tok)}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::domain) throw;
    report["gdn_fa"] = nullptr;
  }

  int coact_layer = 0;
  if (opts.coact_layer) {
    coact_layer = *opts.coact_layer;
  } else {
    double best = -1;
    for (std::size_t l = 0; l < kind_diff.size(); ++l)
      if (!std::isnan(kind_diff[l]) && kind_diff[l] > best) {
        best = kind_diff[l];
        coact_layer = static_cast<int>(l);
      }
  }
  const metrics::CoactMatrix cm = metrics::coactivation_matrix(store, coact_layer);
  {
    const auto n = static_cast<std::size_t>(cm.n);
    std::string dense;
    dense.reserve(n * n * 3);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j) dense += ',';
        dense += std::to_string(cm.counts[i * n + j]);
      }
      dense += '\n';
    }
    w.csv("coact.csv", dense);
    std::string order = "rank,expert,activations\n";
    std::vector<std::uint64_t> sorted(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto e = static_cast<std::size_t>(cm.order[r]);
      order += std::to_string(r) + "," + std::to_string(e) + "," + std::to_string(cm.activations[e]) + "\n";
      for (std::size_t c = 0; c < n; ++c) sorted[r * n + c] = cm.counts[e * n + static_cast<std::size_t>(cm.order[c])];
    }
    w.csv("coact_order.csv", order);
    w.file("coact_heatmap.svg",
           heatmap_svg("Expert co-activation, layer " + std::to_string(coact_layer), cm.n, sorted));
    json top5 = json::array();
    for (std::size_t r = 0; r < 5 && r < n; ++r) top5.push_back(cm.order[r]);
    report["coactivation"] = {{"layer", coact_layer},
                              {"positions", cm.positions},
                              {"top5", top5},
                              {"zero_pair_fraction", cm.zero_pair_fraction}};
  }

  const auto eff = metrics::effective_experts_per_layer(store);
  std::string ee = "layer,effective_experts\n";
  json ej = json::array();
  for (std::size_t l = 0; l < eff.size(); ++l) {
    ee += std::to_string(l) + "," + fixed(eff[l], kDigits) + "\n";
    ej.push_back(number_or_null(eff[l]));
  }
  w.csv("effective_experts.csv", ee);
  report["effective_experts"] = ej;

  std::vector<std::string> files = w.files();
  files.push_back("report.json");
  std::sort(files.begin(), files.end());
  report["files"] = files;
  validate_report(report);
  write_file(opts.out_dir / "report.json", report.dump(2) + "\n");
  return {report, files};
}

namespace {

void need(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::corruption, "report schema: " + what);
}

void need_fields(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  need(j.is_object(), where + " must be an object");
  for (const char* k : keys) need(j.contains(k), where + "." + k + " missing");
}

bool nullable_number(const json& j) { return j.is_null() || j.is_number(); }

void check_cell(const json& c, const std::string& where) {
  need_fields(c, where, {"mean", "n"});
  need(nullable_number(c["mean"]), where + ".mean must be a number or null");
  need(c["n"].is_number_unsigned() || c["n"].is_number_integer(), where + ".n must be an integer");
  if (c["mean"].is_number()) need(c["mean"].get<double>() >= 0 && c["mean"].get<double>() <= 1, where + ".mean outside [0,1]");
}

}  // namespace

void validate_report(const json& r) {
  need_fields(r, "report",
              {"schema_version", "seed", "config_hash", "root_id", "run", "random_baseline", "target", "compile",
               "groups", "layer_conditions", "token_types", "decay", "gdn_fa", "coactivation", "effective_experts",
               "files"});
  need(r["schema_version"] == kReportSchemaVersion, "unsupported schema_version");
  need(r["config_hash"].is_string(), "config_hash must be a string");
  need_fields(r["run"], "run", {"nodes", "completed", "truncated", "errors", "forks_scheduled", "retokenized", "timed_out"});
  need_fields(r["random_baseline"], "random_baseline", {"exact", "ratio_of_expectations"});
  if (!r["compile"].is_null())
    need_fields(r["compile"], "compile", {"attempted", "no_code", "compiled", "failed", "with_preamble", "compile_rate"});
  if (!r["groups"].is_null()) {
    need_fields(r["groups"], "groups", {"count", "singletons", "singleton_fraction", "largest", "differing_lines"});
    for (const auto& g : r["groups"]["largest"]) {
      need_fields(g, "groups.largest[]", {"group_id", "size", "comment_fraction", "blank_fraction", "exec_fraction"});
      const double s = g["comment_fraction"].get<double>() + g["blank_fraction"].get<double>() + g["exec_fraction"].get<double>();
      need(std::abs(s) < 1e-9 || std::abs(s - 1.0) < 1e-9, "group fractions must sum to 1 or be all zero");
    }
  }
  if (!r["layer_conditions"].is_null()) {
    const auto& lc = r["layer_conditions"];
    need_fields(lc, "layer_conditions",
                {"layers", "all_layer_mean", "report_layer_mean", "argmax_layer", "within_node_pairs", "between_node_pairs"});
    need(lc["layers"].is_array(), "layer_conditions.layers must be an array");
    for (const auto& row : lc["layers"]) {
      need_fields(row, "layer_conditions.layers[]", {"layer", "W_same", "W_diff", "B_same", "B_diff", "all"});
      for (const char* c : {"W_same", "W_diff", "B_same", "B_diff", "all"}) check_cell(row[c], std::string("layer.") + c);
    }
  }
  if (!r["token_types"].is_null()) {
    need_fields(r["token_types"], "token_types", {"rows", "skipped_nodes"});
    need(r["token_types"]["rows"].size() == std::size(equiv::kAllLexClasses), "token_types needs one row per class");
    for (const auto& row : r["token_types"]["rows"]) {
      need_fields(row, "token_types.rows[]", {"class", "same_tok", "diff_tok"});
      check_cell(row["same_tok"], "token_types.same_tok");
      check_cell(row["diff_tok"], "token_types.diff_tok");
    }
  }
  need_fields(r["decay"], "decay", {"bin_width", "pairs", "bins"});
  for (const auto& b : r["decay"]["bins"]) {
    need_fields(b, "decay.bins[]", {"offset_lo", "same_tok", "diff_tok", "same_ratio"});
    check_cell(b["same_tok"], "decay.same_tok");
    check_cell(b["diff_tok"], "decay.diff_tok");
  }
  if (!r["gdn_fa"].is_null()) {
    need_fields(r["gdn_fa"], "gdn_fa", {"basis", "same_tok", "diff_tok"});
    for (const char* k : {"same_tok", "diff_tok"}) {
      need_fields(r["gdn_fa"][k], std::string("gdn_fa.") + k, {"U", "p", "exact", "median_gdn", "median_fa", "n_gdn", "n_fa"});
      const double p = r["gdn_fa"][k]["p"].get<double>();
      need(p >= 0 && p <= 1, "gdn_fa p outside [0,1]");
    }
  }
  need_fields(r["coactivation"], "coactivation", {"layer", "positions", "top5", "zero_pair_fraction"});
  need(r["effective_experts"].is_array(), "effective_experts must be an array");
  need(r["files"].is_array(), "files must be an array");
}

}  // namespace moeroute::report
