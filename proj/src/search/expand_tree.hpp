// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "client/gen_client.hpp"
#include "trace/run_store.hpp"

namespace moeroute::search {

using GeneratorFactory = std::function<std::unique_ptr<client::Generator>()>;
using ProgressFn = std::function<void(const std::string& line)>;

struct ExpandResult {
  trace::Manifest manifest;
  std::size_t decision_points = 0;
};

/// Builds the generation tree. The root is generated from the configured
/// prompt; every completed node is scanned for decision points and one child
/// is scheduled per fork candidate. At most `max_concurrent` requests are in
/// flight. When the timeout passes, nothing new is scheduled and in-flight
/// requests are drained. Throws Error(endpoint) if the root itself fails.
ExpandResult expand_tree(const trace::RunConfig& config, const GeneratorFactory& make_generator,
                         trace::RunStore& store, const ProgressFn& progress = {});

/// Turns a generator response into a node. Routing is decoded here; a decode
/// failure turns the node into an error node.
trace::GenNode node_from_response(const trace::RunConfig& config, client::GenResponse resp, std::string node_id,
                                  std::optional<std::string> parent_id, std::optional<int> branch_step,
                                  std::optional<trace::TokenId> forced_token, std::string forced_text,
                                  std::string prefix_text, int depth);

}  // namespace moeroute::search
