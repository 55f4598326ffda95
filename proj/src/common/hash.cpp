// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/hash.hpp"

#include <sodium.h>

#include <vector>

#include "common/error.hpp"

namespace moeroute {

std::string content_hash(std::string_view data) {
  std::vector<unsigned char> digest(crypto_generichash_BYTES_MIN);
  crypto_generichash(digest.data(), digest.size(), reinterpret_cast<const unsigned char*>(data.data()),
                     data.size(), nullptr, 0);
  std::string hex(digest.size() * 2 + 1, '\0');
  sodium_bin2hex(hex.data(), hex.size(), digest.data(), digest.size());
  hex.pop_back();
  return hex;
}

}  // namespace moeroute
