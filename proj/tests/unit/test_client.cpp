// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "client/gen_client.hpp"
#include "client/prompt.hpp"
#include "client/routed_experts.hpp"
#include "common/error.hpp"
#include "mock/builtin.hpp"
#include "mock/mock_server.hpp"
#include "support.hpp"

using namespace moeroute;
using namespace moeroute::client;

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

TEST_CASE("build_prefix with and without the empty think block") {
  auto on = build_prefix("sys", "user", true, "");
  CHECK(ends_with(on, "<think>\n\n</think>\n\n"));
  auto off = build_prefix("sys", "user", false, "");
  CHECK(off.find("<think>") == std::string::npos);
  CHECK(ends_with(off, std::string(kAssistantOpen)));
  auto forced = build_prefix("sys", "user", true, "int ");
  CHECK(ends_with(forced, "<think>\n\n</think>\n\nint "));
  CHECK(forced == build_prefix("sys", "user", true, "int "));
}

TEST_CASE("routed experts: round trip and layout") {
  std::vector<std::int32_t> ids;
  for (int l = 0; l < 40; ++l)
    for (int s = 0; s < 8; ++s) ids.push_back(s);
  auto b64 = encode_routed_experts(ids);
  auto tr = decode_routed_experts(b64, 1, 40, 8, 256);
  CHECK(tr.data() == ids);

  // Little-endian int32, token-major then layer then slot.
  std::vector<std::int32_t> one{1, 256 + 2};
  CHECK(encode_routed_experts(one) == "AQAAAAIBAAA=");
  auto two = decode_routed_experts("AQAAAAIBAAA=", 1, 1, 2, 1000);
  CHECK(two.row(0, 0)[1] == 258);
}

TEST_CASE("routed experts: size and range errors") {
  std::vector<std::int32_t> four{7};
  auto b64 = encode_routed_experts(four);
  try {
    decode_routed_experts(b64, 1, 40, 8, 256);
    FAIL("expected a length mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::decode);
  }
  std::vector<std::int32_t> big{300, 1};
  try {
    decode_routed_experts(encode_routed_experts(big), 1, 1, 2, 256);
    FAIL("expected a range error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain);
  }
  CHECK_THROWS_AS(decode_routed_experts("!!!", 1, 1, 1, 256), Error);
}

TEST_CASE("routed experts: randomized 300-token traces") {
  SplitMix rng(2026);
  for (int trial = 0; trial < 50; ++trial) {
    auto tr = moeroute::testing::random_trace(300, 40, 8, 256, rng);
    auto back = decode_routed_experts(encode_routed_experts(tr.data()), 300, 40, 8, 256);
    REQUIRE(back == tr);
  }
}

TEST_CASE("request body uses the profile's field names") {
  GenRequest req;
  req.prefix_text = "abc";
  req.stop = {"</function>"};
  req.sampling.max_new_tokens = 9;
  auto j = make_request_body(req, {});
  CHECK(j["text"] == "abc");
  CHECK(j["sampling_params"]["max_new_tokens"] == 9);
  CHECK(j["sampling_params"]["top_k"] == 20);
  CHECK(j["top_logprobs_num"] == 30);
  CHECK(j["return_routed_experts"] == true);

  auto profile = EndpointProfile::from_json({{"text", "prompt"}, {"path", "/v2/gen"}});
  CHECK(profile.path == "/v2/gen");
  CHECK(make_request_body(req, profile).contains("prompt"));
}

TEST_CASE("response parsing trims a trailing stop string") {
  nlohmann::json body = {
      {"text", "ab</function>"},
      {"meta_info",
       {{"finish_reason", {{"type", "stop"}}},
        {"prompt_tokens", 12},
        {"output_token_logprobs", {{-0.1, 1, "a"}, {-0.2, 2, "b"}, {-0.3, 3, "</function>"}}},
        {"output_top_logprobs", {{{-0.1, 1, "a"}}, {{-0.2, 2, "b"}}, {{-0.3, 3, "</function>"}}}},
        {"routed_experts", ""}}}};
  auto r = parse_response_body(body.dump(), {}, {"</function>"});
  CHECK(r.finish == FinishReason::stop);
  CHECK(r.token_ids == std::vector<trace::TokenId>{1, 2});
  CHECK(r.top_logprobs.size() == 2);
  CHECK(r.stop_trimmed == 1);
  CHECK(r.prompt_tokens == 12);

  body["meta_info"]["output_top_logprobs"].erase(0);
  CHECK_THROWS_AS(parse_response_body(body.dump(), {}, {"</function>"}), Error);
  CHECK_THROWS_AS(parse_response_body("not json", {}, {}), Error);
}

TEST_CASE("generate against the mock endpoint") {
  mock::MockServer server(mock::builtin_grammar_config());
  server.start();
  GenClient client(server.url());
  GenRequest req;
  req.prefix_text = build_prefix("s", "u", true, "");
  req.stop = {"</function>"};

  SUBCASE("one token") {
    req.sampling.max_new_tokens = 1;
    auto r = client.generate(req);
    REQUIRE(r.error.empty());
    CHECK(r.finish == FinishReason::length);
    CHECK(r.token_ids.size() == 1);
    CHECK(r.top_logprobs.size() == 1);
    // 1 x 40 x 8 int32 = 1280 bytes -> 1708 Base64 characters with padding.
    CHECK(r.routed_experts_b64.size() == 4 * ((1 * 40 * 8 * 4 + 2) / 3));
    CHECK_NOTHROW(decode_routed_experts(r.routed_experts_b64, 1, 40, 8, 256));
  }
  SUBCASE("runs to the stop string") {
    auto r = client.generate(req);
    REQUIRE(r.error.empty());
    CHECK(r.finish == FinishReason::stop);
    CHECK(r.token_ids.size() == r.top_logprobs.size());
    CHECK(r.token_ids.size() == r.token_texts.size());
    for (const auto& t : r.token_texts) CHECK(t != "</function>");
  }
  SUBCASE("deterministic") {
    auto a = client.generate(req);
    auto b = client.generate(req);
    CHECK(a.token_ids == b.token_ids);
    CHECK(a.routed_experts_b64 == b.routed_experts_b64);
  }
  server.stop();
}

TEST_CASE("stop reached at a scripted step") {
  mock::MockServer server(mock::scripted_root_dp_config());
  server.start();
  GenClient client(server.url());
  GenRequest req;
  req.prefix_text = build_prefix("s", "u", true, "");
  req.stop = {"</function>"};
  auto r = client.generate(req);
  REQUIRE(r.error.empty());
  CHECK(r.finish == FinishReason::stop);
  // The script emits four tokens and then the stop token, which is trimmed.
  CHECK(r.token_ids.size() == 4);
  server.stop();
}

TEST_CASE("unreachable endpoint fails after the configured attempts") {
  GenClient client("http://127.0.0.1:1", {}, RetryPolicy{3, std::chrono::milliseconds(5)});
  GenRequest req;
  req.prefix_text = "x";
  auto r = client.generate(req);
  CHECK(r.finish == FinishReason::error);
  CHECK(r.attempts == 3);
  CHECK_FALSE(r.error.empty());
  CHECK(r.token_ids.empty());
}
