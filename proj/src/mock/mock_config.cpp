// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "mock/mock_config.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/text.hpp"

namespace moeroute::mock {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::config, "mock config: " + what); }

}  // namespace

void MockConfig::index_vocab() {
  index_.clear();
  max_token_len_ = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i].empty()) bad("empty vocabulary entry at " + std::to_string(i));
    if (!index_.emplace(vocab[i], static_cast<TokenId>(i)).second) bad("duplicate vocabulary entry '" + vocab[i] + "'");
    max_token_len_ = std::max(max_token_len_, vocab[i].size());
  }
}

std::optional<TokenId> MockConfig::find_token(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId MockConfig::stop_id() const {
  auto id = find_token(stop_token);
  if (!id) bad("stop token '" + stop_token + "' is not in the vocabulary");
  return *id;
}

std::optional<std::vector<TokenId>> MockConfig::tokenize(std::string_view text) const {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = std::min(max_token_len_, text.size() - pos);
    bool found = false;
    for (; len > 0; --len) {
      auto id = find_token(text.substr(pos, len));
      if (id) {
        out.push_back(*id);
        pos += len;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return out;
}

void MockConfig::validate() const {
  if (vocab.empty()) bad("missing vocab");
  if (n_layers < 1 || slots < 1 || n_routed_experts < slots) bad("bad routing dimensions");
  if (context_window < 1) bad("context_window must be positive");
  if (static_cast<int>(locality.size()) != n_layers) bad("routing_locality needs one value per layer");
  for (double l : locality) {
    if (!(l >= 0.0 && l <= 1.0)) bad("routing_locality values must lie in [0, 1]");
  }
  if (grammar.has_value() == script.has_value()) bad("exactly one of grammar or script is required");
  const TokenId stop = stop_id();
  const auto vsize = static_cast<TokenId>(vocab.size());
  if (grammar) {
    const auto& g = *grammar;
    if (g.states.empty() || g.start < 0 || g.start >= static_cast<int>(g.states.size())) bad("grammar has no start state");
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      const auto& st = g.states[s];
      if (st.edges.empty()) bad("grammar state " + std::to_string(s) + " has no edges");
      double sum = 0.0;
      for (const auto& e : st.edges) {
        if (e.token < 0 || e.token >= vsize) bad("grammar edge token out of range");
        if (!(e.weight > 0.0)) bad("grammar edge weights must be positive");
        if (e.token != stop && (e.next < 0 || e.next >= static_cast<int>(g.states.size())))
          bad("grammar edge from state " + std::to_string(s) + " points nowhere");
        sum += e.weight;
      }
      if (std::abs(sum - 1.0) > 1e-9) bad("grammar state " + std::to_string(s) + " weights sum to " + std::to_string(sum));
    }
  }
  if (script) {
    for (std::size_t i = 0; i < script->size(); ++i) {
      const auto& step = (*script)[i];
      if (step.top.empty()) bad("script step " + std::to_string(i) + " has an empty distribution");
      double sum = 0.0;
      for (const auto& [tok, p] : step.top) {
        if (tok < 0 || tok >= vsize) bad("script token out of range");
        if (!(p > 0.0 && p <= 1.0)) bad("script probabilities must lie in (0, 1]");
        sum += p;
      }
      if (sum > 1.0 + 1e-9) bad("script step " + std::to_string(i) + " probabilities exceed 1");
      if (step.emit < 0 || step.emit >= vsize) bad("script emit token out of range");
    }
  }
}

std::vector<double> interpolate_locality(int n_layers, const std::vector<std::pair<int, double>>& anchors) {
  if (anchors.empty()) bad("locality anchors are empty");
  auto sorted = anchors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(static_cast<std::size_t>(n_layers));
  for (int l = 0; l < n_layers; ++l) {
    if (l <= sorted.front().first) {
      out[l] = sorted.front().second;
      continue;
    }
    if (l >= sorted.back().first) {
      out[l] = sorted.back().second;
      continue;
    }
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      const auto [x1, y1] = sorted[k];
      if (l <= x1) {
        const auto [x0, y0] = sorted[k - 1];
        out[l] = x1 == x0 ? y1 : y0 + (y1 - y0) * static_cast<double>(l - x0) / static_cast<double>(x1 - x0);
        break;
      }
    }
  }
  return out;
}

Grammar compile_segments(const MockConfig& cfg, const std::vector<Segment>& segments) {
  Grammar g;
  // Entry state per segment, plus one final state that emits the stop token.
  for (std::size_t i = 0; i <= segments.size(); ++i) g.states.emplace_back();
  const TokenId stop = cfg.stop_id();
  g.states.back().edges.push_back({stop, 1.0, -1});
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const int next_entry = static_cast<int>(si + 1);
    if (segments[si].empty()) bad("segment " + std::to_string(si) + " has no alternatives");
    for (const auto& [text, weight] : segments[si]) {
      if (!(weight > 0.0)) bad("segment alternatives need positive weights");
      auto toks = cfg.tokenize(text);
      if (!toks || toks->empty()) bad("cannot tokenize segment text '" + text + "'");
      int cur = static_cast<int>(si);
      for (std::size_t k = 0; k < toks->size(); ++k) {
        const bool last = k + 1 == toks->size();
        auto& edges = g.states[static_cast<std::size_t>(cur)].edges;
        auto it = std::find_if(edges.begin(), edges.end(), [&](const GrammarEdge& e) { return e.token == (*toks)[k]; });
        if (it == edges.end()) {
          int target = next_entry;
          if (!last) {
            target = static_cast<int>(g.states.size());
            g.states.emplace_back();
          }
          // `edges` may dangle after emplace_back above.
          g.states[static_cast<std::size_t>(cur)].edges.push_back({(*toks)[k], weight, target});
          cur = target;
          continue;
        }
        if ((it->next == next_entry) != last) {
          bad("segment alternative '" + text + "' is a token prefix of another alternative");
        }
        it->weight += weight;
        cur = it->next;
      }
    }
  }
  for (auto& st : g.states) {
    double sum = 0.0;
    for (const auto& e : st.edges) sum += e.weight;
    for (auto& e : st.edges) e.weight /= sum;
  }
  g.start = 0;
  return g;
}

MockConfig MockConfig::from_json(const json& j) {
  MockConfig c;
  try {
    if (!j.is_object()) bad("expected a JSON object");
    if (!j.contains("vocab")) bad("missing vocab");
    c.vocab = j.at("vocab").get<std::vector<std::string>>();
    c.stop_token = j.value("stop_token", c.stop_token);
    c.seed = j.value("seed", c.seed);
    c.n_layers = j.value("n_layers", c.n_layers);
    c.slots = j.value("slots", c.slots);
    c.n_routed_experts = j.value("n_routed_experts", c.n_routed_experts);
    c.context_window = j.value("context_window", c.context_window);
    c.latency_ms = j.value("latency_ms", c.latency_ms);
    c.threads = j.value("threads", c.threads);
    c.index_vocab();
    if (c.n_layers < 1) bad("n_layers must be positive");

    const json& loc = j.contains("routing_locality") ? j.at("routing_locality") : json(0.0);
    if (loc.is_number()) {
      c.locality.assign(static_cast<std::size_t>(c.n_layers), loc.get<double>());
    } else if (loc.is_array()) {
      c.locality = loc.get<std::vector<double>>();
    } else if (loc.is_object() && loc.contains("anchors")) {
      std::vector<std::pair<int, double>> anchors;
      for (const auto& a : loc.at("anchors")) anchors.emplace_back(a.at(0).get<int>(), a.at(1).get<double>());
      c.locality = interpolate_locality(c.n_layers, anchors);
    } else {
      bad("routing_locality must be a number, an array, or {\"anchors\": [...]}");
    }

    auto token_of = [&](const json& t) {
      auto id = c.find_token(t.get<std::string>());
      if (!id) bad("token '" + t.get<std::string>() + "' is not in the vocabulary");
      return *id;
    };

    if (j.contains("grammar")) {
      const json& gj = j.at("grammar");
      if (gj.contains("segments")) {
        std::vector<Segment> segs;
        for (const auto& s : gj.at("segments")) {
          Segment seg;
          for (const auto& alt : s) seg.emplace_back(alt.at(0).get<std::string>(), alt.at(1).get<double>());
          segs.push_back(std::move(seg));
        }
        c.grammar = compile_segments(c, segs);
      } else if (gj.contains("states")) {
        Grammar g;
        g.start = gj.value("start", 0);
        for (const auto& s : gj.at("states")) {
          GrammarState st;
          for (const auto& e : s.at("edges")) st.edges.push_back({token_of(e.at(0)), e.at(1).get<double>(), e.at(2).get<int>()});
          g.states.push_back(std::move(st));
        }
        c.grammar = std::move(g);
      } else {
        bad("grammar needs \"segments\" or \"states\"");
      }
    }
    if (j.contains("script")) {
      std::vector<ScriptStep> steps;
      for (const auto& s : j.at("script").at("steps")) {
        ScriptStep step;
        for (const auto& e : s.at("top")) step.top.emplace_back(token_of(e.at(0)), e.at(1).get<double>());
        std::stable_sort(step.top.begin(), step.top.end(), [](auto& a, auto& b) { return a.second > b.second; });
        if (s.contains("emit")) {
          step.emit = token_of(s.at("emit"));
        } else if (!step.top.empty()) {
          step.emit = step.top.front().first;
        }
        steps.push_back(std::move(step));
      }
      c.script = std::move(steps);
    }
  } catch (const json::exception& e) {
    bad(e.what());
  }
  c.validate();
  return c;
}

MockConfig MockConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  } catch (const Error& e) {
    bad(e.what());
  }
  return from_json(j);
}

json MockConfig::to_json() const {
  json j = {{"vocab", vocab},
            {"stop_token", stop_token},
            {"seed", seed},
            {"n_layers", n_layers},
            {"slots", slots},
            {"n_routed_experts", n_routed_experts},
            {"context_window", context_window},
            {"latency_ms", latency_ms},
            {"threads", threads},
            {"routing_locality", locality}};
  if (grammar) {
    json states = json::array();
    for (const auto& st : grammar->states) {
      json edges = json::array();
      for (const auto& e : st.edges) edges.push_back(json::array({token_text(e.token), e.weight, e.next}));
      states.push_back({{"edges", std::move(edges)}});
    }
    j["grammar"] = {{"start", grammar->start}, {"states", std::move(states)}};
  }
  if (script) {
    json steps = json::array();
    for (const auto& s : *script) {
      json top = json::array();
      for (const auto& [tok, p] : s.top) top.push_back(json::array({token_text(tok), p}));
      steps.push_back({{"top", std::move(top)}, {"emit", token_text(s.emit)}});
    }
    j["script"] = {{"steps", std::move(steps)}};
  }
  return j;
}

}  // namespace moeroute::mock
