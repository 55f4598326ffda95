// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace moeroute::client {

inline constexpr std::string_view kAssistantOpen = "<|im_start|>assistant\n";
inline constexpr std::string_view kEmptyThinkBlock = "<think>\n\n</think>\n\n";

/// Two-turn chat prompt in the ChatML layout. With `thinking_skip` the
/// assistant turn opens with an already-closed, empty think block so the model
/// answers directly.
std::string build_prefix(std::string_view system_text, std::string_view user_text, bool thinking_skip,
                         std::string_view forced_suffix);

}  // namespace moeroute::client
