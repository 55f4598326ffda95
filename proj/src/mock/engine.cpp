// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "mock/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "client/prompt.hpp"
#include "client/routed_experts.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"

namespace moeroute::mock {

using nlohmann::json;

namespace {

[[noreturn]] void bad_request(const std::string& what) { fail(ErrorCode::invalid_argument, what); }

json entry(double prob, TokenId id, const std::string& text) {
  return json::array({std::log(prob), id, text});
}

MockConfig prepared(MockConfig cfg) {
  cfg.index_vocab();
  cfg.validate();
  return cfg;
}

}  // namespace

MockEngine::MockEngine(MockConfig cfg) : cfg_(prepared(std::move(cfg))), routing_(cfg_), stop_id_(cfg_.stop_id()) {}

MockEngine::Parsed MockEngine::parse_completion(const std::string& completion) const {
  Parsed out;
  if (cfg_.scripted()) {
    auto toks = cfg_.tokenize(completion);
    if (!toks) bad_request("prefix is not expressible in the mock vocabulary");
    out.tokens = std::move(*toks);
    return out;
  }
  // Depth-first walk of the grammar over the text; the first full parse wins.
  const Grammar& g = *cfg_.grammar;
  struct Frame {
    int state;
    std::size_t pos;
    std::size_t edge;
  };
  std::vector<Frame> stack{{g.start, 0, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.pos == completion.size()) {
      out.state = f.state;
      for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
        const auto& fr = stack[i];
        out.tokens.push_back(g.states[static_cast<std::size_t>(fr.state)].edges[fr.edge - 1].token);
      }
      return out;
    }
    const auto& edges = g.states[static_cast<std::size_t>(f.state)].edges;
    bool advanced = false;
    while (f.edge < edges.size()) {
      const auto& e = edges[f.edge++];
      if (e.token == stop_id_) continue;
      const std::string& t = cfg_.token_text(e.token);
      if (completion.compare(f.pos, t.size(), t) == 0) {
        const std::size_t next_pos = f.pos + t.size();
        stack.push_back({e.next, next_pos, 0});
        advanced = true;
        break;
      }
    }
    if (!advanced) stack.pop_back();
  }
  bad_request("prefix is not derivable from the mock grammar");
}

json MockEngine::generate(const json& req) const {
  if (!req.is_object() || !req.contains("text") || !req.at("text").is_string()) {
    bad_request("request needs a string field 'text'");
  }
  client::SamplingParams sampling;
  std::vector<std::string> stops;
  int top_n = 0;
  bool want_routing = false;
  try {
    if (req.contains("sampling_params")) {
      const json& sp = req.at("sampling_params");
      sampling.temperature = sp.value("temperature", 1.0);
      sampling.top_p = sp.value("top_p", 1.0);
      sampling.top_k = sp.value("top_k", -1);
      sampling.max_new_tokens = sp.value("max_new_tokens", 128);
      if (sp.contains("stop")) {
        const json& s = sp.at("stop");
        if (s.is_string()) stops.push_back(s.get<std::string>());
        if (s.is_array()) stops = s.get<std::vector<std::string>>();
      }
    } else {
      sampling.temperature = 1.0;
      sampling.top_p = 1.0;
      sampling.top_k = -1;
      sampling.max_new_tokens = 128;
    }
    if (req.value("return_logprob", false)) top_n = req.value("top_logprobs_num", 0);
    want_routing = req.value("return_routed_experts", false);
  } catch (const json::exception& e) {
    bad_request(std::string("bad request field: ") + e.what());
  }
  if (!(sampling.temperature > 0.0) || !(sampling.top_p > 0.0) || sampling.max_new_tokens < 1) {
    bad_request("sampling_params out of range");
  }

  if (cfg_.latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.latency_ms));

  const std::string& text = req.at("text").get_ref<const std::string&>();
  std::size_t start = 0;
  const std::size_t open = text.rfind(client::kAssistantOpen);
  if (open != std::string::npos) {
    start = open + client::kAssistantOpen.size();
    if (text.compare(start, client::kEmptyThinkBlock.size(), client::kEmptyThinkBlock) == 0) {
      start += client::kEmptyThinkBlock.size();
    }
  }
  Parsed parsed = parse_completion(text.substr(start));
  const std::uint64_t prompt_hash = fnv1a64(std::string_view(text).substr(0, start));
  SplitMix rng(hash_combine(cfg_.seed, fnv1a64(text)));

  std::vector<TokenId> history = parsed.tokens;
  const std::size_t prefix_len = history.size();
  int state = parsed.state;
  json out_tokens = json::array();
  json out_top = json::array();
  std::vector<trace::ExpertId> routing;
  std::string out_text;
  json finish;
  std::vector<Candidate> dist;

  auto is_stop = [&](TokenId id) {
    if (id == stop_id_) return true;
    return std::find(stops.begin(), stops.end(), cfg_.token_text(id)) != stops.end();
  };

  for (int generated = 0;; ++generated) {
    if (generated == sampling.max_new_tokens) {
      finish = {{"type", "length"}, {"length", generated}};
      break;
    }
    const std::size_t pos = history.size();
    TokenId tok;
    std::vector<Candidate> top;
    int next_state = state;
    if (cfg_.scripted()) {
      const auto step_idx = pos;
      if (step_idx < cfg_.script->size()) {
        const auto& step = (*cfg_.script)[step_idx];
        for (const auto& [id, p] : step.top) top.push_back({id, p});
        tok = step.emit;
      } else {
        top.push_back({stop_id_, 1.0});
        tok = stop_id_;
      }
      if (static_cast<int>(top.size()) > top_n) top.resize(static_cast<std::size_t>(std::max(top_n, 0)));
    } else {
      const auto& edges = cfg_.grammar->states[static_cast<std::size_t>(state)].edges;
      dist.clear();
      for (const auto& e : edges) dist.push_back({e.token, e.weight});
      auto step = synth_next(dist, sampling, rng.uniform(), std::max(top_n, 1));
      tok = step.token;
      top = std::move(step.top);
      if (top_n <= 0) top.clear();
      for (const auto& e : edges) {
        if (e.token == tok) next_state = e.next;
      }
    }
    if (is_stop(tok)) {
      finish = {{"type", "stop"}, {"matched", cfg_.token_text(tok)}};
      break;
    }
    double chosen_prob = 1.0;
    json top_row = json::array();
    for (const auto& c : top) {
      top_row.push_back(entry(c.prob, c.token, cfg_.token_text(c.token)));
      if (c.token == tok) chosen_prob = c.prob;
    }
    out_tokens.push_back(entry(chosen_prob, tok, cfg_.token_text(tok)));
    out_top.push_back(std::move(top_row));
    out_text += cfg_.token_text(tok);
    if (want_routing) {
      routing_.route_position(tok, context_hash(history, pos, cfg_.context_window, prompt_hash), routing);
    }
    history.push_back(tok);
    state = next_state;
  }

  const std::size_t n_out = history.size() - prefix_len;
  json meta = {{"finish_reason", finish},
               {"prompt_tokens", static_cast<std::int64_t>(start + prefix_len)},
               {"completion_tokens", n_out},
               {"output_token_logprobs", std::move(out_tokens)},
               {"output_top_logprobs", std::move(out_top)}};
  if (want_routing) meta["routed_experts"] = client::encode_routed_experts(routing);
  return json{{"text", out_text}, {"meta_info", std::move(meta)}};
}

}  // namespace moeroute::mock
