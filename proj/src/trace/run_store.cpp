// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "trace/run_store.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace moeroute::trace {

using nlohmann::json;

namespace {

constexpr const char* kNodesFile = "nodes.jsonl";
constexpr const char* kManifestFile = "manifest.json";
constexpr int kManifestVersion = 1;

}  // namespace

void to_json(json& j, const Manifest& m) {
  j = json{{"started_at", m.started_at},     {"finished_at", m.finished_at},
           {"wall_seconds", m.wall_seconds}, {"counts", {{"completed", m.completed}, {"truncated", m.truncated}, {"error", m.errors}}},
           {"forks_scheduled", m.forks_scheduled}, {"retokenized", m.retokenized},
           {"max_in_flight", m.max_in_flight},     {"timed_out", m.timed_out}};
}

void from_json(const json& j, Manifest& m) {
  m.started_at = j.value("started_at", std::string());
  m.finished_at = j.value("finished_at", std::string());
  m.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("counts")) {
    const auto& c = j.at("counts");
    m.completed = c.value("completed", std::size_t{0});
    m.truncated = c.value("truncated", std::size_t{0});
    m.errors = c.value("error", std::size_t{0});
  }
  m.forks_scheduled = j.value("forks_scheduled", std::size_t{0});
  m.retokenized = j.value("retokenized", std::size_t{0});
  m.max_in_flight = j.value("max_in_flight", 0);
  m.timed_out = j.value("timed_out", false);
}

std::string FullSequence::text() const {
  std::string out;
  for (const auto& t : token_texts) out += t;
  return out;
}

RunStore::RunStore(RunConfig config) : config_(std::move(config)), mutex_(std::make_unique<std::mutex>()) {}

RunStore::RunStore(RunStore&&) noexcept = default;
RunStore& RunStore::operator=(RunStore&&) noexcept = default;
RunStore::~RunStore() = default;

RunStore RunStore::create(const std::filesystem::path& dir, RunConfig config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  RunStore store(std::move(config));
  store.dir_ = dir;
  store.out_ = std::make_unique<std::ofstream>(dir / kNodesFile, std::ios::binary | std::ios::trunc);
  if (!*store.out_) fail(ErrorCode::io, "cannot open " + (dir / kNodesFile).string());
  std::filesystem::remove(dir / kManifestFile, ec);
  return store;
}

RunStore RunStore::load(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / kManifestFile));
  } catch (const json::exception& e) {
    fail(ErrorCode::corruption, "manifest: " + std::string(e.what()));
  }
  RunStore store(manifest.at("config").get<RunConfig>());
  store.manifest_ = manifest.get<Manifest>();
  // Counts are rebuilt as the nodes are replayed.
  store.manifest_.completed = store.manifest_.truncated = store.manifest_.errors = store.manifest_.retokenized = 0;
  const std::string body = read_file(dir / kNodesFile);
  std::size_t line_no = 0;
  for (auto line : split_lines(body)) {
    ++line_no;
    if (is_blank(line)) continue;
    GenNode node;
    try {
      node = json::parse(line).get<GenNode>();
    } catch (const json::exception& e) {
      fail(ErrorCode::corruption, "nodes.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
    store.store_node(std::move(node));
  }
  store.dir_ = dir;
  return store;
}

void RunStore::check_node(const GenNode& node) const {
  auto reject = [&](const std::string& why) {
    fail(ErrorCode::invalid_argument, "node " + node.node_id + " rejected: " + why);
  };
  if (node.node_id.empty()) reject("empty node_id");
  const std::size_t n = node.gen_token_ids.size();
  if (node.gen_token_texts.size() != n || node.top_logprobs.size() != n || node.trace.n_tokens() != n) {
    reject("per-step arrays differ in length");
  }
  node.trace.check(config_.n_layers, config_.routed_experts_per_layer, config_.n_routed_experts);
  if (node.parent_id) {
    if (!node.branch_step || !node.forced_token) reject("non-root node without branch_step/forced_token");
    if (!nodes_.count(*node.parent_id)) reject("dangling parent_id " + *node.parent_id);
    if (*node.branch_step < 0) reject("negative branch_step");
  } else if (root_id_ && *root_id_ != node.node_id) {
    reject("a second root");
  }
}

std::string RunStore::store_node(GenNode node) {
  std::lock_guard lock(*mutex_);
  if (nodes_.count(node.node_id)) return node.node_id;
  check_node(node);
  if (out_) {
    // Token text is written with invalid UTF-8 replaced; servers may split
    // multi-byte characters across tokens.
    *out_ << json(node).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    out_->flush();
    if (!*out_) fail(ErrorCode::io, "append to nodes.jsonl failed");
  }
  std::string id = node.node_id;
  if (node.parent_id) {
    children_.emplace(*node.parent_id, id);
  } else {
    root_id_ = id;
  }
  switch (node.finish) {
    case Finish::completed: ++manifest_.completed; break;
    case Finish::truncated: ++manifest_.truncated; break;
    case Finish::error: ++manifest_.errors; break;
  }
  if (node.retokenized) ++manifest_.retokenized;
  nodes_.emplace(id, std::move(node));
  return id;
}

void RunStore::finalize(Manifest manifest) {
  std::lock_guard lock(*mutex_);
  manifest.completed = manifest.truncated = manifest.errors = manifest.retokenized = 0;
  for (const auto& [id, n] : nodes_) {
    if (n.finish == Finish::completed) ++manifest.completed;
    if (n.finish == Finish::truncated) ++manifest.truncated;
    if (n.finish == Finish::error) ++manifest.errors;
    if (n.retokenized) ++manifest.retokenized;
  }
  manifest_ = manifest;
  if (out_) out_->flush();
  if (dir_) {
    json j = manifest_;
    j["version"] = kManifestVersion;
    j["config"] = config_;
    j["config_hash"] = config_hash(config_);
    j["root_id"] = root_id_ ? json(*root_id_) : json(nullptr);
    j["node_count"] = nodes_.size();
    write_file(*dir_ / kManifestFile, j.dump(2) + "\n");
  }
}

const GenNode* RunStore::find(const std::string& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const GenNode& RunStore::node(const std::string& id) const {
  const GenNode* n = find(id);
  if (!n) fail(ErrorCode::invalid_argument, "unknown node " + id);
  return *n;
}

std::vector<std::string> RunStore::children(const std::string& id) const {
  std::vector<std::string> out;
  auto [lo, hi] = children_.equal_range(id);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<const GenNode*> RunStore::ancestry(const std::string& id) const {
  std::vector<const GenNode*> chain;
  std::set<std::string> seen;
  const GenNode* cur = &node(id);
  while (true) {
    if (!seen.insert(cur->node_id).second) fail(ErrorCode::corruption, "cycle through node " + cur->node_id);
    chain.push_back(cur);
    if (!cur->parent_id) break;
    const GenNode* parent = find(*cur->parent_id);
    if (!parent) fail(ErrorCode::corruption, "node " + cur->node_id + " has a missing parent");
    cur = parent;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::string RunStore::reconstruct_prefix(const std::string& id) const {
  auto chain = ancestry(id);
  std::string prefix = chain.front()->prefix_text;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const GenNode& parent = *chain[i - 1];
    const GenNode& child = *chain[i];
    const auto step = static_cast<std::size_t>(*child.branch_step);
    if (step > parent.gen_token_texts.size()) {
      fail(ErrorCode::corruption, "branch_step beyond parent length at node " + child.node_id);
    }
    for (std::size_t s = 0; s < step; ++s) prefix += parent.gen_token_texts[s];
    prefix += child.forced_text;
  }
  return prefix;
}

FullSequence RunStore::expand(const std::string& id) const {
  auto chain = ancestry(id);
  FullSequence seq;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const GenNode& cur = *chain[i];
    std::size_t take = cur.gen_token_ids.size();
    if (i + 1 < chain.size()) {
      take = static_cast<std::size_t>(*chain[i + 1]->branch_step);
      if (take > cur.gen_token_ids.size()) fail(ErrorCode::corruption, "branch_step beyond parent length");
    }
    if (i + 1 == chain.size()) seq.own_start = seq.token_ids.size();
    for (std::size_t s = 0; s < take; ++s) {
      seq.token_ids.push_back(cur.gen_token_ids[s]);
      seq.token_texts.push_back(cur.gen_token_texts[s]);
      seq.rows.push_back(cur.trace.n_tokens() > s ? cur.trace.token_rows(s) : nullptr);
    }
    if (i + 1 < chain.size()) {
      const GenNode& child = *chain[i + 1];
      seq.token_ids.push_back(*child.forced_token);
      seq.token_texts.push_back(child.forced_text);
      seq.rows.push_back(nullptr);
    }
  }
  return seq;
}

std::vector<SiblingPair> RunStore::extract_sibling_pairs() const {
  std::vector<SiblingPair> pairs;
  for (const auto& [id, n] : nodes_) {
    if (n.finish != Finish::completed || !n.parent_id) continue;
    const GenNode* parent = find(*n.parent_id);
    if (!parent) continue;
    // Siblings compare even when the parent itself did not complete.
    if (parent->finish == Finish::completed) pairs.push_back({parent->node_id, n.node_id, *n.branch_step});
    for (const auto& sib_id : children(parent->node_id)) {
      const GenNode* sib = find(sib_id);
      if (!sib || sib_id <= id || sib->finish != Finish::completed || sib->branch_step != n.branch_step) continue;
      pairs.push_back({id, sib_id, *n.branch_step});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const SiblingPair& x, const SiblingPair& y) {
    return std::tie(x.node_a, x.node_b) < std::tie(y.node_a, y.node_b);
  });
  return pairs;
}

void RunStore::check_tree() const {
  if (nodes_.empty()) return;
  std::size_t roots = 0;
  for (const auto& [id, n] : nodes_) {
    if (!n.parent_id) ++roots;
  }
  if (roots != 1) fail(ErrorCode::corruption, "expected exactly one root, found " + std::to_string(roots));
  std::set<std::string> reached;
  std::vector<std::string> stack{*root_id_};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    if (!reached.insert(cur).second) fail(ErrorCode::corruption, "node reached twice: " + cur);
    for (auto& c : children(cur)) stack.push_back(c);
  }
  if (reached.size() != nodes_.size()) fail(ErrorCode::corruption, "unreachable nodes in tree");
}

}  // namespace moeroute::trace
