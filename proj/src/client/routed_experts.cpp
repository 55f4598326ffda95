// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "client/routed_experts.hpp"

#include <sodium.h>

#include <vector>

#include "common/error.hpp"

namespace moeroute::client {

std::string encode_routed_experts(std::span<const std::int32_t> ids) {
  std::vector<unsigned char> bytes(ids.size() * 4);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto v = static_cast<std::uint32_t>(ids[i]);
    bytes[4 * i + 0] = static_cast<unsigned char>(v & 0xff);
    bytes[4 * i + 1] = static_cast<unsigned char>((v >> 8) & 0xff);
    bytes[4 * i + 2] = static_cast<unsigned char>((v >> 16) & 0xff);
    bytes[4 * i + 3] = static_cast<unsigned char>((v >> 24) & 0xff);
  }
  const int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_encoded_len(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.resize(out.size() - 1);  // drop the terminating NUL
  return out;
}

trace::RoutingTrace decode_routed_experts(std::string_view b64, std::size_t n_tokens, int n_layers, int slots,
                                          int n_experts) {
  const std::size_t count = n_tokens * static_cast<std::size_t>(n_layers) * static_cast<std::size_t>(slots);
  std::vector<unsigned char> bytes(b64.size() / 4 * 3 + 3);
  std::size_t bin_len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(bytes.data(), bytes.size(), b64.data(), b64.size(), "\r\n", &bin_len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != b64.data() + b64.size()) {
    fail(ErrorCode::decode, "routed experts: invalid Base64");
  }
  if (bin_len != count * 4) {
    fail(ErrorCode::decode, "routed experts: decoded " + std::to_string(bin_len) + " bytes, expected " +
                                std::to_string(count * 4) + " for " + std::to_string(n_tokens) + "x" +
                                std::to_string(n_layers) + "x" + std::to_string(slots) + " int32");
  }
  std::vector<trace::ExpertId> ids(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t v = static_cast<std::uint32_t>(bytes[4 * i]) | (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
    const auto id = static_cast<std::int32_t>(v);
    if (id < 0 || id >= n_experts) {
      fail(ErrorCode::domain, "routed experts: ID " + std::to_string(id) + " outside [0, " +
                                  std::to_string(n_experts) + ")");
    }
    ids[i] = id;
  }
  return trace::RoutingTrace(n_tokens, n_layers, slots, std::move(ids));
}

}  // namespace moeroute::client
