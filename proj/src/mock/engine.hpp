// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <json.hpp>

#include "mock/mock_config.hpp"
#include "mock/synth.hpp"

namespace moeroute::mock {

/// Request-to-response logic of the mock endpoint, independent of HTTP.
/// Stateless after construction; safe to call from many threads.
class MockEngine {
 public:
  explicit MockEngine(MockConfig cfg);

  /// Throws Error(invalid_argument) for requests the mock cannot serve; the
  /// server maps that to HTTP 400.
  nlohmann::json generate(const nlohmann::json& request) const;

  const MockConfig& config() const { return cfg_; }

 private:
  struct Parsed {
    std::vector<TokenId> tokens;
    int state = 0;
  };
  Parsed parse_completion(const std::string& completion) const;

  MockConfig cfg_;
  RoutingModel routing_;
  TokenId stop_id_;
};

}  // namespace moeroute::mock
