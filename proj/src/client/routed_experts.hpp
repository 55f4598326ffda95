// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "trace/types.hpp"

namespace moeroute::client {

/// Base64 (standard alphabet, padded) of little-endian int32 values.
std::string encode_routed_experts(std::span<const std::int32_t> ids);

/// Inverse of encode_routed_experts, reshaped token-major / layer / slot.
/// Throws Error(decode) when the byte length is not
/// n_tokens * n_layers * slots * 4 or the text is not Base64, and
/// Error(domain) when an ID falls outside [0, n_experts).
trace::RoutingTrace decode_routed_experts(std::string_view b64, std::size_t n_tokens, int n_layers, int slots,
                                          int n_experts);

}  // namespace moeroute::client
