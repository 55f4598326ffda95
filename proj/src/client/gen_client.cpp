// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "client/gen_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <limits>
#include <thread>

#include "common/error.hpp"
#include "common/text.hpp"

namespace moeroute::client {

using nlohmann::json;

const char* to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

EndpointProfile EndpointProfile::from_json(const json& j) {
  EndpointProfile p;
  auto take = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  try {
    take("path", p.path);
    take("text", p.text);
    take("sampling_params", p.sampling_params);
    take("temperature", p.temperature);
    take("top_p", p.top_p);
    take("top_k", p.top_k);
    take("max_new_tokens", p.max_new_tokens);
    take("stop", p.stop);
    take("return_logprob", p.return_logprob);
    take("top_logprobs_num", p.top_logprobs_num);
    take("return_text_in_logprobs", p.return_text_in_logprobs);
    take("return_routed_experts", p.return_routed_experts);
    take("meta_info", p.meta_info);
    take("finish_reason", p.finish_reason);
    take("output_token_logprobs", p.output_token_logprobs);
    take("output_top_logprobs", p.output_top_logprobs);
    take("routed_experts", p.routed_experts);
    take("prompt_tokens", p.prompt_tokens);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("endpoint profile: ") + e.what());
  }
  return p;
}

EndpointProfile EndpointProfile::load(const std::string& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, "endpoint profile " + path + ": " + e.what());
  }
}

json make_request_body(const GenRequest& req, const EndpointProfile& p) {
  json sampling = {{p.temperature, req.sampling.temperature},
                   {p.top_p, req.sampling.top_p},
                   {p.top_k, req.sampling.top_k},
                   {p.max_new_tokens, req.sampling.max_new_tokens},
                   {p.stop, req.stop}};
  return json{{p.text, req.prefix_text},
              {p.sampling_params, std::move(sampling)},
              {p.return_logprob, true},
              {p.top_logprobs_num, req.top_logprobs_num},
              {p.return_text_in_logprobs, true},
              {p.return_routed_experts, req.return_routed_experts}};
}

namespace {

// Entries look like [logprob, token_id, text]; text may be null when the
// server was not asked for it.
trace::TopLogprob parse_entry(const json& e) {
  if (!e.is_array() || e.size() < 2) fail(ErrorCode::decode, "logprob entry is not [logprob, id, text]");
  trace::TopLogprob out;
  out.logprob = e.at(0).is_null() ? -std::numeric_limits<double>::infinity() : e.at(0).get<double>();
  out.token_id = e.at(1).get<trace::TokenId>();
  if (e.size() > 2 && e.at(2).is_string()) out.text = e.at(2).get<std::string>();
  return out;
}

FinishReason parse_finish(const json& f) {
  std::string type;
  if (f.is_string()) type = f.get<std::string>();
  if (f.is_object()) type = f.value("type", std::string());
  if (type == "stop") return FinishReason::stop;
  if (type == "length") return FinishReason::length;
  return FinishReason::error;
}

}  // namespace

GenResponse parse_response_body(const std::string& body, const EndpointProfile& p,
                                const std::vector<std::string>& stop) {
  GenResponse r;
  try {
    const json j = json::parse(body);
    const json& meta = j.at(p.meta_info);
    r.finish = parse_finish(meta.contains(p.finish_reason) ? meta.at(p.finish_reason) : json());
    for (const auto& e : meta.at(p.output_token_logprobs)) {
      auto entry = parse_entry(e);
      r.token_ids.push_back(entry.token_id);
      r.token_texts.push_back(std::move(entry.text));
    }
    for (const auto& row : meta.at(p.output_top_logprobs)) {
      std::vector<trace::TopLogprob> step;
      if (!row.is_null()) {
        for (const auto& e : row) step.push_back(parse_entry(e));
      }
      r.top_logprobs.push_back(std::move(step));
    }
    if (meta.contains(p.routed_experts) && meta.at(p.routed_experts).is_string()) {
      r.routed_experts_b64 = meta.at(p.routed_experts).get<std::string>();
    }
    if (meta.contains(p.prompt_tokens) && meta.at(p.prompt_tokens).is_number_integer()) {
      r.prompt_tokens = meta.at(p.prompt_tokens).get<std::int64_t>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::decode, std::string("malformed /generate response: ") + e.what());
  }
  if (r.top_logprobs.size() != r.token_ids.size()) {
    fail(ErrorCode::decode, "malformed /generate response: token and logprob rows differ in length");
  }
  if (r.finish == FinishReason::stop) {
    // Servers differ on whether the matched stop string stays in the output.
    std::size_t longest = 0;
    for (const auto& s : stop) longest = std::max(longest, s.size());
    std::string tail;
    for (std::size_t k = r.token_texts.size(); k > 0 && tail.size() < longest; --k) {
      tail.insert(0, r.token_texts[k - 1]);
      if (std::find(stop.begin(), stop.end(), tail) != stop.end()) {
        r.stop_trimmed = r.token_ids.size() - (k - 1);
        r.token_ids.resize(k - 1);
        r.token_texts.resize(k - 1);
        r.top_logprobs.resize(k - 1);
        break;
      }
    }
  }
  return r;
}

GenClient::GenClient(const std::string& base_url, EndpointProfile profile, RetryPolicy retry)
    : http_(std::make_unique<httplib::Client>(base_url)), profile_(std::move(profile)), retry_(retry) {
  http_->set_connection_timeout(std::chrono::seconds(5));
  http_->set_read_timeout(std::chrono::minutes(10));
  http_->set_write_timeout(std::chrono::seconds(30));
  http_->set_keep_alive(true);
}

GenClient::~GenClient() = default;

GenResponse GenClient::generate(const GenRequest& request) {
  const std::string body = make_request_body(request, profile_).dump(-1, ' ', false, json::error_handler_t::replace);
  auto backoff = retry_.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, retry_.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = http_->Post(profile_.path, body, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      if (attempt < attempts) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      continue;
    }
    GenResponse out;
    out.attempts = attempt;
    if (res->status != 200) {
      out.error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      return out;
    }
    try {
      out = parse_response_body(res->body, profile_, request.stop);
      out.attempts = attempt;
      if (out.finish == FinishReason::error) {
        GenResponse failed;
        failed.error = "server reported an aborted generation";
        failed.attempts = attempt;
        return failed;
      }
    } catch (const Error& e) {
      GenResponse failed;
      failed.error = e.what();
      failed.attempts = attempt;
      return failed;
    }
    return out;
  }
  GenResponse failed;
  failed.error = last_error + " after " + std::to_string(attempts) + " attempts";
  failed.attempts = attempts;
  return failed;
}

}  // namespace moeroute::client
