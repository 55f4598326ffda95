// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "mock/mock_server.hpp"

#include <httplib.h>

#include "common/error.hpp"

namespace moeroute::mock {

using nlohmann::json;

MockServer::MockServer(MockConfig cfg) : engine_(std::move(cfg)) {}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  const int threads = std::max(4, engine_.config().threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };

  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    json body = {{"status", "ok"}, {"mode", engine_.config().scripted() ? "scripted" : "grammar"}};
    res.set_content(body.dump(), "application/json");
  });
  server_->Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
    json request;
    try {
      request = json::parse(req.body);
    } catch (const json::parse_error& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("invalid JSON: ") + e.what()}}.dump(), "application/json");
      return;
    }
    try {
      res.set_content(engine_.generate(request).dump(), "application/json");
    } catch (const Error& e) {
      res.status = e.code() == ErrorCode::invalid_argument ? 400 : 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) fail(ErrorCode::io, "cannot bind mock server to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string MockServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace moeroute::mock
