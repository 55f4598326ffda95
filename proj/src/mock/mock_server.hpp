// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <thread>

#include "mock/engine.hpp"

namespace httplib {
class Server;
}

namespace moeroute::mock {

/// HTTP front for MockEngine: POST /generate and GET /health.
class MockServer {
 public:
  explicit MockServer(MockConfig cfg);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port. Throws Error(io) when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  int port() const { return port_; }
  std::string url() const;
  const MockEngine& engine() const { return engine_; }

 private:
  MockEngine engine_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

}  // namespace moeroute::mock
