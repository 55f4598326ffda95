// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "client/prompt.hpp"

namespace moeroute::client {

std::string build_prefix(std::string_view system_text, std::string_view user_text, bool thinking_skip,
                         std::string_view forced_suffix) {
  std::string out;
  out.reserve(system_text.size() + user_text.size() + forced_suffix.size() + 96);
  out += "<|im_start|>system\n";
  out += system_text;
  out += "<|im_end|>\n<|im_start|>user\n";
  out += user_text;
  out += "<|im_end|>\n";
  out += kAssistantOpen;
  if (thinking_skip) out += kEmptyThinkBlock;
  out += forced_suffix;
  return out;
}

}  // namespace moeroute::client
