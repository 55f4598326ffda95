// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trace/types.hpp"

namespace httplib {
class Client;
}

namespace moeroute::client {

struct SamplingParams {
  double temperature = 0.7;
  double top_p = 0.95;
  int top_k = 20;
  int max_new_tokens = 2048;
};

struct GenRequest {
  std::string prefix_text;
  SamplingParams sampling;
  int top_logprobs_num = 30;
  bool return_routed_experts = true;
  std::vector<std::string> stop;
};

enum class FinishReason { stop, length, error };

const char* to_string(FinishReason r);

/// Parallel per-token arrays are either all populated to the same length or,
/// when finish == error, all empty.
struct GenResponse {
  std::vector<trace::TokenId> token_ids;
  std::vector<std::string> token_texts;
  std::vector<std::vector<trace::TopLogprob>> top_logprobs;
  FinishReason finish = FinishReason::error;
  std::string routed_experts_b64;
  std::optional<std::int64_t> prompt_tokens;
  /// Stop-string tokens removed from the tail; their routing rows, if the
  /// server sent any, are still present at the end of routed_experts_b64.
  std::size_t stop_trimmed = 0;
  std::string error;
  int attempts = 0;
};

/// Wire field names of a /generate-style endpoint. Defaults follow SGLang's
/// native API; a JSON profile file may override any subset.
struct EndpointProfile {
  std::string path = "/generate";
  std::string text = "text";
  std::string sampling_params = "sampling_params";
  std::string temperature = "temperature";
  std::string top_p = "top_p";
  std::string top_k = "top_k";
  std::string max_new_tokens = "max_new_tokens";
  std::string stop = "stop";
  std::string return_logprob = "return_logprob";
  std::string top_logprobs_num = "top_logprobs_num";
  std::string return_text_in_logprobs = "return_text_in_logprobs";
  std::string return_routed_experts = "return_routed_experts";
  std::string meta_info = "meta_info";
  std::string finish_reason = "finish_reason";
  std::string output_token_logprobs = "output_token_logprobs";
  std::string output_top_logprobs = "output_top_logprobs";
  std::string routed_experts = "routed_experts";
  std::string prompt_tokens = "prompt_tokens";

  static EndpointProfile from_json(const nlohmann::json& j);
  static EndpointProfile load(const std::string& path);
};

nlohmann::json make_request_body(const GenRequest& req, const EndpointProfile& profile);

/// Parses a /generate response body. Trailing tokens that spell one of the
/// stop strings are removed. Throws Error(decode) on a malformed body.
GenResponse parse_response_body(const std::string& body, const EndpointProfile& profile,
                                const std::vector<std::string>& stop);

/// Anything that can serve a generation request; the tree expander only sees
/// this interface.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenResponse generate(const GenRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

/// One HTTP connection to the endpoint. Not thread-safe: use one per worker.
class GenClient : public Generator {
 public:
  GenClient(const std::string& base_url, EndpointProfile profile = {}, RetryPolicy retry = {});
  ~GenClient() override;

  /// Retries only transport failures (no HTTP response at all), with
  /// exponential backoff. Never throws; failures come back as finish=error.
  GenResponse generate(const GenRequest& request) override;

 private:
  std::unique_ptr<httplib::Client> http_;
  EndpointProfile profile_;
  RetryPolicy retry_;
};

}  // namespace moeroute::client
