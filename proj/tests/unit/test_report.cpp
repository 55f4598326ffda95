// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "client/gen_client.hpp"
#include "common/error.hpp"
#include "common/text.hpp"
#include "mock/builtin.hpp"
#include "mock/mock_server.hpp"
#include "report/analyze.hpp"
#include "search/expand_tree.hpp"
#include "support.hpp"
#include "trace/run_store.hpp"

using namespace moeroute;
using moeroute::testing::constant_trace;
using moeroute::testing::make_node;
using moeroute::testing::TempDir;
using nlohmann::json;

namespace {

// Runs the crossing mock into `dir` once per process.
const std::filesystem::path& crossing_store() {
  static TempDir dir("report-store");
  static bool done = [] {
    mock::MockServer server(mock::builtin_grammar_config());
    server.start();
    trace::RunConfig cfg;
    cfg.endpoint_url = server.url();
    cfg.max_concurrent = 8;
    auto store = trace::RunStore::create(dir.path(), cfg);
    auto res = search::expand_tree(
        cfg, [&] { return std::make_unique<client::GenClient>(cfg.endpoint_url); }, store);
    store.finalize(res.manifest);
    server.stop();
    return true;
  }();
  (void)done;
  return dir.path();
}

// Rows of a CSV body without the leading comment line.
std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  for (auto line : split_lines(body)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss{std::string(line)};
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("full analysis of a crossing mock run") {
  TempDir out("report-out");
  report::AnalyzeOptions opts;
  opts.store_dir = crossing_store();
  opts.out_dir = out.path();
  auto res = report::analyze(opts);
  const json& r = res.report;
  CHECK_NOTHROW(report::validate_report(r));
  CHECK(r == json::parse(read_file(out / "report.json")));

  for (const auto& f : res.files) CHECK(std::filesystem::exists(out / f));
  for (const char* f : {"groups.csv", "layer_conditions.csv", "condition_summary.csv", "token_types.csv", "decay.csv",
                        "gdn_fa.csv", "coact.csv", "effective_experts.csv", "layer_curves.svg", "coact_heatmap.svg"})
    CHECK(std::find(res.files.begin(), res.files.end(), f) != res.files.end());

  // Every CSV is tagged and rectangular.
  for (const auto& f : res.files) {
    if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
    const std::string body = read_file(out / f);
    CHECK(body.rfind("# seed=", 0) == 0);
    auto rows = parse_csv(body);
    REQUIRE(!rows.empty());
    for (const auto& row : rows) CHECK(row.size() == rows.front().size());
  }

  // Groups partition the compiled nodes.
  auto groups = parse_csv(read_file(out / "groups.csv"));
  std::size_t members = 0;
  for (std::size_t i = 1; i < groups.size(); ++i) {
    members += std::stoul(groups[i][1]);
    const double sum = std::stod(groups[i][2]) + std::stod(groups[i][3]) + std::stod(groups[i][4]);
    CHECK((std::abs(sum) < 1e-3 || std::abs(sum - 100.0) < 1e-3));
  }
  CHECK(members == r["compile"]["compiled"].get<std::size_t>());

  // The designed mid-layer peak of diff-token overlap is recovered.
  const int diff_peak = r["layer_conditions"]["argmax_layer"]["diff_tok"];
  CHECK(diff_peak >= 12);
  CHECK(diff_peak <= 22);
  CHECK(r["coactivation"]["layer"] == diff_peak);

  // Token-type n values add up to the within-group aligned positions.
  std::uint64_t type_n = 0;
  for (const auto& row : r["token_types"]["rows"])
    type_n += row["same_tok"]["n"].get<std::uint64_t>() + row["diff_tok"]["n"].get<std::uint64_t>();
  std::uint64_t within_n = 0;
  for (const auto& row : r["layer_conditions"]["layers"])
    if (row["layer"] == 0) within_n = row["W_same"]["n"].get<std::uint64_t>() + row["W_diff"]["n"].get<std::uint64_t>();
  if (r["token_types"]["skipped_nodes"] == 0) {
    CHECK(type_n == within_n);
  } else {
    CHECK(type_n <= within_n);
  }
}

TEST_CASE("skip-compile analysis is deterministic and omits compile sections") {
  TempDir a("skip-a"), b("skip-b");
  report::AnalyzeOptions opts;
  opts.store_dir = crossing_store();
  opts.skip_compile = true;
  opts.out_dir = a.path();
  auto ra = report::analyze(opts);
  opts.out_dir = b.path();
  auto rb = report::analyze(opts);
  CHECK(ra.files == rb.files);
  for (const auto& f : ra.files) CHECK(read_file(a / f) == read_file(b / f));
  for (const char* k : {"target", "compile", "groups", "layer_conditions", "token_types"}) CHECK(ra.report[k].is_null());
  CHECK(ra.report["gdn_fa"]["basis"] == "sibling_pairs");

  opts.seed = 12345;
  opts.out_dir = a.path();
  auto rc = report::analyze(opts);
  CHECK(rc.report["seed"] == 12345);
  CHECK(read_file(a / "decay.csv").rfind("# seed=12345 ", 0) == 0);
}

TEST_CASE("identical sources form one group") {
  TempDir store_dir("same-store"), out("same-out");
  auto cfg = moeroute::testing::small_config(8, 8, 64);
  {
    auto store = trace::RunStore::create(store_dir.path(), cfg);
    auto root = make_node({1}, constant_trace(1, 8, 8), std::nullopt, std::nullopt, std::nullopt,
                          trace::Finish::truncated, {"int"});
    store.store_node(root);
    for (int k = 0; k < 3; ++k) {
      auto c = make_node({5, 6}, constant_trace(2, 8, 8, k), root.node_id, 0, 100 + k, trace::Finish::completed,
                         {" f(void)", "{return 0;}\n"});
      c.forced_text = "int";
      store.store_node(c);
    }
    store.finalize({});
  }
  report::AnalyzeOptions opts;
  opts.store_dir = store_dir.path();
  opts.out_dir = out.path();
  auto r = report::analyze(opts).report;
  CHECK(r["groups"]["count"] == 1);
  CHECK(r["groups"]["singletons"] == 0);
  CHECK(r["groups"]["singleton_fraction"] == 0.0);
  CHECK(r["groups"]["largest"][0]["size"] == 3);
  CHECK(r["compile"]["compiled"] == 3);
}

TEST_CASE("a store without completed nodes is insufficient") {
  TempDir store_dir("empty-store"), out("empty-out");
  {
    auto store = trace::RunStore::create(store_dir.path(), moeroute::testing::small_config(8, 8, 64));
    store.store_node(make_node({1}, constant_trace(1, 8, 8), std::nullopt, std::nullopt, std::nullopt,
                               trace::Finish::truncated));
    store.finalize({});
  }
  report::AnalyzeOptions opts;
  opts.store_dir = store_dir.path();
  opts.out_dir = out.path();
  try {
    report::analyze(opts);
    FAIL("expected insufficient data");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_data);
  }
}

TEST_CASE("validate_report rejects broken reports") {
  CHECK_THROWS_AS(report::validate_report(json::object()), Error);
  TempDir out("val-out");
  report::AnalyzeOptions opts;
  opts.store_dir = crossing_store();
  opts.out_dir = out.path();
  opts.skip_compile = true;
  auto r = report::analyze(opts).report;
  auto bad = r;
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(report::validate_report(bad), Error);
  bad = r;
  bad.erase("decay");
  CHECK_THROWS_AS(report::validate_report(bad), Error);
}
