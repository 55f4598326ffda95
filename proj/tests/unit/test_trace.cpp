// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/text.hpp"
#include "support.hpp"
#include "trace/run_store.hpp"

using namespace moeroute;
using namespace moeroute::trace;
using moeroute::testing::constant_trace;
using moeroute::testing::make_node;
using moeroute::testing::random_trace;
using moeroute::testing::TempDir;

TEST_CASE("content_hash is a fixed-width hex digest") {
  auto h = content_hash("abc");
  CHECK(h.size() == 32);
  CHECK(h == content_hash("abc"));
  CHECK(h != content_hash("abd"));
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("text helpers") {
  auto lines = split_lines("a\nb\r\n\nc");
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "b");
  CHECK(lines[2].empty());
  CHECK(rtrim("x \t") == "x");
  CHECK(is_blank(" \t"));
  CHECK_FALSE(is_blank(" x"));
}

TEST_CASE("run config defaults validate and round-trip") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.p_target == doctest::Approx(0.40));
  CHECK(c.k_max_forks == 20);
  CHECK(c.n_layers == 40);
  CHECK(c.routed_experts_per_layer == 8);
  CHECK(c.n_routed_experts == 256);
  CHECK(c.fa_layer_rule.is_full_attention(3));
  CHECK_FALSE(c.fa_layer_rule.is_full_attention(4));
  nlohmann::json j = c;
  CHECK(j.get<RunConfig>() == c);
  CHECK(config_hash(c) == config_hash(j.get<RunConfig>()));

  auto bad = c;
  bad.p_target = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.k_max_forks = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.routed_experts_per_layer = 300;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("store_node accepts a well-formed root") {
  RunStore store(RunConfig{});
  SplitMix rng(1);
  std::vector<TokenId> toks(300, 5);
  auto id = store.store_node(make_node(toks, random_trace(300, 40, 8, 256, rng)));
  CHECK(store.size() == 1);
  CHECK(store.manifest().completed == 1);
  CHECK(store.root_id() == id);
  // Idempotent on an identical ID.
  store.store_node(make_node(toks, random_trace(300, 40, 8, 256, rng)));
  CHECK(store.size() == 1);
  CHECK(store.manifest().completed == 1);
}

TEST_CASE("store_node rejects a trace with the wrong layer count") {
  RunStore store(RunConfig{});
  SplitMix rng(2);
  try {
    store.store_node(make_node({1, 2}, random_trace(2, 39, 8, 256, rng)));
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }
}

TEST_CASE("store_node rejects a dangling parent") {
  RunStore store(RunConfig{});
  SplitMix rng(3);
  auto n = make_node({1}, random_trace(1, 40, 8, 256, rng), std::string("nope"), 0, 4);
  CHECK_THROWS_AS(store.store_node(n), Error);
}

TEST_CASE("store_node rejects duplicate expert IDs in a row") {
  RunStore store(RunConfig{});
  std::vector<ExpertId> ids(40 * 8, 0);
  CHECK_THROWS_AS(store.store_node(make_node({1}, RoutingTrace(1, 40, 8, ids))), Error);
}

TEST_CASE("node IDs are content hashes of the fork coordinates") {
  auto root = make_node_id(std::nullopt, std::nullopt, std::nullopt);
  CHECK(root == make_node_id(std::nullopt, std::nullopt, std::nullopt));
  auto a = make_node_id(root, 3, 17);
  CHECK(a == make_node_id(root, 3, 17));
  CHECK(a != make_node_id(root, 3, 18));
  CHECK(a != make_node_id(root, 4, 17));
}

namespace {

RunConfig tiny() { return moeroute::testing::small_config(2, 2, 8); }

}  // namespace

TEST_CASE("reconstruct_prefix follows the ancestry") {
  RunStore store(tiny());
  auto root = make_node({1, 2, 3, 4, 5, 6, 7}, constant_trace(7, 2, 2), std::nullopt, std::nullopt, std::nullopt,
                        Finish::completed, {"a", "b", "c", "d", "e", "f", "g"});
  root.prefix_text = "PROMPT:";
  store.store_node(root);
  CHECK(store.reconstruct_prefix(root.node_id) == "PROMPT:");

  auto child = make_node({9}, constant_trace(1, 2, 2), root.node_id, 5, 42);
  child.forced_text = "qsort";
  child.prefix_text = "PROMPT:abcdeqsort";
  store.store_node(child);
  CHECK(store.reconstruct_prefix(child.node_id) == "PROMPT:abcdeqsort");

  auto grandchild = make_node({8}, constant_trace(1, 2, 2), child.node_id, 0, 11);
  grandchild.forced_text = "(";
  store.store_node(grandchild);
  CHECK(store.reconstruct_prefix(grandchild.node_id) == "PROMPT:abcdeqsort(");

  auto seq = store.expand(grandchild.node_id);
  CHECK(seq.token_ids == std::vector<TokenId>{1, 2, 3, 4, 5, 42, 11, 8});
  CHECK(seq.own_start == 7);
  CHECK(seq.rows[5] == nullptr);
  CHECK(seq.rows[6] == nullptr);
  CHECK(seq.rows[7] != nullptr);
  CHECK_NOTHROW(store.check_tree());
}

TEST_CASE("sibling pairs: parent-child and same-step children") {
  SUBCASE("one completed child") {
    RunStore store(tiny());
    auto root = make_node({1, 2, 3}, constant_trace(3, 2, 2));
    store.store_node(root);
    store.store_node(make_node({4}, constant_trace(1, 2, 2), root.node_id, 12 % 3, 7));
    auto pairs = store.extract_sibling_pairs();
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].node_a == root.node_id);
  }
  SUBCASE("fork step recorded") {
    RunStore store(tiny());
    std::vector<TokenId> toks(20, 1);
    auto root = make_node(toks, constant_trace(20, 2, 2));
    store.store_node(root);
    store.store_node(make_node({4}, constant_trace(1, 2, 2), root.node_id, 12, 7));
    auto pairs = store.extract_sibling_pairs();
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].fork_step == 12);
  }
  SUBCASE("truncated child yields nothing") {
    RunStore store(tiny());
    auto root = make_node({1, 2, 3}, constant_trace(3, 2, 2));
    store.store_node(root);
    store.store_node(make_node({4}, constant_trace(1, 2, 2), root.node_id, 1, 7, Finish::truncated));
    CHECK(store.extract_sibling_pairs().empty());
  }
}

TEST_CASE("sibling pairs match an exhaustive scan over a random tree") {
  SplitMix rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    RunStore store(tiny());
    std::vector<GenNode> all;
    all.push_back(make_node({1, 2, 3, 4, 5, 6}, constant_trace(6, 2, 2)));
    store.store_node(all.back());
    for (int i = 0; i < 15; ++i) {
      const GenNode& parent = all[rng.below(all.size())];
      int step = static_cast<int>(rng.below(parent.gen_token_ids.size()));
      TokenId forced = static_cast<TokenId>(100 + rng.below(4));
      auto finish = rng.below(4) == 0 ? Finish::truncated : Finish::completed;
      auto n = make_node({1, 2, 3, 4, 5, 6}, constant_trace(6, 2, 2), parent.node_id, step, forced, finish);
      if (store.find(n.node_id)) continue;
      store.store_node(n);
      all.push_back(n);
    }
    std::set<std::tuple<std::string, std::string, int>> expect;
    for (const auto& a : all) {
      for (const auto& b : all) {
        if (a.finish != Finish::completed || b.finish != Finish::completed) continue;
        if (b.parent_id == a.node_id) expect.insert({a.node_id, b.node_id, *b.branch_step});
        if (a.parent_id && a.parent_id == b.parent_id && a.branch_step == b.branch_step &&
            a.node_id < b.node_id) {
          expect.insert({a.node_id, b.node_id, *a.branch_step});
        }
      }
    }
    std::set<std::tuple<std::string, std::string, int>> got;
    for (const auto& p : store.extract_sibling_pairs()) got.insert({p.node_a, p.node_b, p.fork_step});
    CHECK(got == expect);
  }
}

TEST_CASE("persistent store reloads field by field") {
  TempDir dir("store");
  SplitMix rng(5);
  RunConfig cfg = moeroute::testing::small_config(4, 8, 64);
  cfg.seed = 11;
  std::vector<GenNode> written;
  {
    auto store = RunStore::create(dir.path(), cfg);
    auto root = make_node({1, 2, 3, 4}, random_trace(4, 4, 8, 64, rng));
    root.prefix_text = "p\xc3\xa9";
    root.prompt_tokens = 17;
    written.push_back(root);
    store.store_node(root);
    auto child = make_node({5, 6}, random_trace(2, 4, 8, 64, rng), root.node_id, 2, 9, Finish::truncated);
    child.depth = 1;
    written.push_back(child);
    store.store_node(child);
    Manifest m;
    m.started_at = "s";
    m.timed_out = true;
    store.finalize(m);
  }
  auto loaded = RunStore::load(dir.path());
  CHECK(loaded.config() == cfg);
  CHECK(loaded.size() == 2);
  CHECK(loaded.manifest().completed == 1);
  CHECK(loaded.manifest().truncated == 1);
  CHECK(loaded.manifest().timed_out);
  for (const auto& n : written) CHECK(loaded.node(n.node_id) == n);
}

TEST_CASE("corrupt node file is reported as corruption") {
  TempDir dir("corrupt");
  {
    auto store = RunStore::create(dir.path(), tiny());
    store.finalize({});
  }
  write_file(dir / "nodes.jsonl", "{not json\n");
  try {
    RunStore::load(dir.path());
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::corruption);
  }
}
