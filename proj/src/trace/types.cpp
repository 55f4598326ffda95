// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "trace/types.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace moeroute::trace {

using nlohmann::json;

void RunConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::config, "invalid run config: " + what); };
  if (!(p_target > 0.0 && p_target < 1.0)) bad("p_target must lie in (0, 1)");
  if (k_max_forks < 2) bad("k_max_forks must be >= 2");
  if (max_concurrent < 1) bad("max_concurrent must be >= 1");
  if (!(temperature > 0.0)) bad("temperature must be positive");
  if (!(top_p > 0.0 && top_p <= 1.0)) bad("top_p must lie in (0, 1]");
  if (top_k < 1) bad("top_k must be positive");
  if (max_gen_len < 1) bad("max_gen_len must be positive");
  if (top_logprobs_num < 1) bad("top_logprobs_num must be positive");
  if (n_layers < 1) bad("n_layers must be positive");
  if (routed_experts_per_layer < 1) bad("routed_experts_per_layer must be positive");
  if (n_routed_experts < routed_experts_per_layer) bad("routed_experts_per_layer exceeds n_routed_experts");
  if (fa_layer_rule.period < 1 || fa_layer_rule.offset < 0 || fa_layer_rule.offset >= fa_layer_rule.period)
    bad("fa_layer_rule needs 0 <= offset < period");
  if (timeout.count() <= 0) bad("timeout must be positive");
  if (max_retries < 1) bad("max_retries must be >= 1");
  if (endpoint_url.empty()) bad("endpoint_url is empty");
}

void to_json(json& j, const RunConfig& c) {
  j = json{
      {"endpoint_url", c.endpoint_url},
      {"endpoint_profile", c.endpoint_profile},
      {"p_target", c.p_target},
      {"k_max_forks", c.k_max_forks},
      {"timeout_seconds", static_cast<double>(c.timeout.count()) / 1000.0},
      {"max_concurrent", c.max_concurrent},
      {"temperature", c.temperature},
      {"top_p", c.top_p},
      {"top_k", c.top_k},
      {"max_gen_len", c.max_gen_len},
      {"top_logprobs_num", c.top_logprobs_num},
      {"n_layers", c.n_layers},
      {"routed_experts_per_layer", c.routed_experts_per_layer},
      {"n_routed_experts", c.n_routed_experts},
      {"fa_layer_rule", {{"period", c.fa_layer_rule.period}, {"offset", c.fa_layer_rule.offset}}},
      {"stop_token", c.stop_token},
      {"thinking_skip", c.thinking_skip},
      {"fork_includes_sampled", c.fork_includes_sampled},
      {"seed", c.seed},
      {"system_text", c.system_text},
      {"user_text", c.user_text},
      {"max_retries", c.max_retries},
      {"retry_backoff_ms", c.retry_backoff.count()},
  };
}

void from_json(const json& j, RunConfig& c) {
  if (!j.is_object()) fail(ErrorCode::config, "run config must be a JSON object");
  RunConfig d;
  try {
    d.endpoint_url = j.value("endpoint_url", d.endpoint_url);
    d.endpoint_profile = j.value("endpoint_profile", d.endpoint_profile);
    d.p_target = j.value("p_target", d.p_target);
    d.k_max_forks = j.value("k_max_forks", d.k_max_forks);
    if (j.contains("timeout_seconds")) {
      d.timeout = std::chrono::milliseconds(
          static_cast<std::int64_t>(j.at("timeout_seconds").get<double>() * 1000.0 + 0.5));
    }
    d.max_concurrent = j.value("max_concurrent", d.max_concurrent);
    d.temperature = j.value("temperature", d.temperature);
    d.top_p = j.value("top_p", d.top_p);
    d.top_k = j.value("top_k", d.top_k);
    d.max_gen_len = j.value("max_gen_len", d.max_gen_len);
    d.top_logprobs_num = j.value("top_logprobs_num", d.top_logprobs_num);
    d.n_layers = j.value("n_layers", d.n_layers);
    d.routed_experts_per_layer = j.value("routed_experts_per_layer", d.routed_experts_per_layer);
    d.n_routed_experts = j.value("n_routed_experts", d.n_routed_experts);
    if (j.contains("fa_layer_rule")) {
      const auto& r = j.at("fa_layer_rule");
      d.fa_layer_rule.period = r.value("period", d.fa_layer_rule.period);
      d.fa_layer_rule.offset = r.value("offset", d.fa_layer_rule.offset);
    }
    d.stop_token = j.value("stop_token", d.stop_token);
    d.thinking_skip = j.value("thinking_skip", d.thinking_skip);
    d.fork_includes_sampled = j.value("fork_includes_sampled", d.fork_includes_sampled);
    d.seed = j.value("seed", d.seed);
    d.system_text = j.value("system_text", d.system_text);
    d.user_text = j.value("user_text", d.user_text);
    d.max_retries = j.value("max_retries", d.max_retries);
    d.retry_backoff = std::chrono::milliseconds(j.value("retry_backoff_ms", d.retry_backoff.count()));
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("run config: ") + e.what());
  }
  c = std::move(d);
}

std::string config_hash(const RunConfig& c) { return content_hash(json(c).dump()); }

RoutingTrace::RoutingTrace(std::size_t n_tokens, int n_layers, int slots, std::vector<ExpertId> ids)
    : n_tokens_(n_tokens), n_layers_(n_layers), slots_(slots), ids_(std::move(ids)) {
  if (n_layers < 0 || slots < 0 || ids_.size() != n_tokens * static_cast<std::size_t>(n_layers) * slots) {
    fail(ErrorCode::invalid_argument, "routing trace size does not match its dimensions");
  }
}

void RoutingTrace::check(int n_layers, int slots, int n_experts) const {
  if (n_tokens_ == 0) return;
  if (n_layers_ != n_layers || slots_ != slots) {
    fail(ErrorCode::invalid_argument, "trace dimension mismatch: got " + std::to_string(n_layers_) + "x" +
                                          std::to_string(slots_) + ", expected " + std::to_string(n_layers) +
                                          "x" + std::to_string(slots));
  }
  std::vector<ExpertId> row_copy(static_cast<std::size_t>(slots));
  for (std::size_t t = 0; t < n_tokens_; ++t) {
    for (int l = 0; l < n_layers_; ++l) {
      auto r = row(t, l);
      std::copy(r.begin(), r.end(), row_copy.begin());
      std::sort(row_copy.begin(), row_copy.end());
      if (row_copy.front() < 0 || row_copy.back() >= n_experts) {
        fail(ErrorCode::invalid_argument, "expert ID out of range at token " + std::to_string(t));
      }
      if (std::adjacent_find(row_copy.begin(), row_copy.end()) != row_copy.end()) {
        fail(ErrorCode::invalid_argument, "duplicate expert ID at token " + std::to_string(t) + " layer " +
                                              std::to_string(l));
      }
    }
  }
}

const char* to_string(Finish f) {
  switch (f) {
    case Finish::completed: return "completed";
    case Finish::truncated: return "truncated";
    case Finish::error: return "error";
  }
  return "error";
}

Finish finish_from_string(const std::string& s) {
  if (s == "completed") return Finish::completed;
  if (s == "truncated") return Finish::truncated;
  if (s == "error") return Finish::error;
  fail(ErrorCode::corruption, "unknown finish status '" + s + "'");
}

void to_json(json& j, const GenNode& n) {
  json logprobs = json::array();
  for (const auto& step : n.top_logprobs) {
    json row = json::array();
    for (const auto& c : step) row.push_back(json::array({c.token_id, c.logprob, c.text}));
    logprobs.push_back(std::move(row));
  }
  j = json{
      {"node_id", n.node_id},
      {"parent_id", n.parent_id ? json(*n.parent_id) : json(nullptr)},
      {"branch_step", n.branch_step ? json(*n.branch_step) : json(nullptr)},
      {"forced_token", n.forced_token ? json(*n.forced_token) : json(nullptr)},
      {"forced_text", n.forced_text},
      {"prefix_text", n.prefix_text},
      {"gen_token_ids", n.gen_token_ids},
      {"gen_token_texts", n.gen_token_texts},
      {"top_logprobs", std::move(logprobs)},
      {"trace",
       {{"n_tokens", n.trace.n_tokens()},
        {"n_layers", n.trace.n_layers()},
        {"slots", n.trace.slots()},
        {"experts", n.trace.data()}}},
      {"finish", to_string(n.finish)},
      {"depth", n.depth},
      {"prompt_tokens", n.prompt_tokens ? json(*n.prompt_tokens) : json(nullptr)},
      {"retokenized", n.retokenized},
      {"error", n.error},
  };
}

void from_json(const json& j, GenNode& n) {
  GenNode out;
  out.node_id = j.at("node_id").get<std::string>();
  if (!j.at("parent_id").is_null()) out.parent_id = j.at("parent_id").get<std::string>();
  if (!j.at("branch_step").is_null()) out.branch_step = j.at("branch_step").get<int>();
  if (!j.at("forced_token").is_null()) out.forced_token = j.at("forced_token").get<TokenId>();
  out.forced_text = j.at("forced_text").get<std::string>();
  out.prefix_text = j.at("prefix_text").get<std::string>();
  out.gen_token_ids = j.at("gen_token_ids").get<std::vector<TokenId>>();
  out.gen_token_texts = j.at("gen_token_texts").get<std::vector<std::string>>();
  for (const auto& row : j.at("top_logprobs")) {
    std::vector<TopLogprob> step;
    for (const auto& c : row) step.push_back({c.at(0).get<TokenId>(), c.at(1).get<double>(), c.at(2).get<std::string>()});
    out.top_logprobs.push_back(std::move(step));
  }
  const auto& t = j.at("trace");
  out.trace = RoutingTrace(t.at("n_tokens").get<std::size_t>(), t.at("n_layers").get<int>(), t.at("slots").get<int>(),
                           t.at("experts").get<std::vector<ExpertId>>());
  out.finish = finish_from_string(j.at("finish").get<std::string>());
  out.depth = j.value("depth", 0);
  if (j.contains("prompt_tokens") && !j.at("prompt_tokens").is_null())
    out.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  out.retokenized = j.value("retokenized", false);
  out.error = j.value("error", std::string());
  n = std::move(out);
}

std::string make_node_id(const std::optional<std::string>& parent_id, std::optional<int> branch_step,
                         std::optional<TokenId> forced_token) {
  if (!parent_id) return content_hash("root");
  std::string key = "child|" + *parent_id + "|" + std::to_string(branch_step.value_or(-1)) + "|" +
                    std::to_string(forced_token.value_or(-1));
  return content_hash(key);
}

}  // namespace moeroute::trace
