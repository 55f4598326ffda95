// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace moeroute {

// Numeric values double as process exit codes for the CLI where they overlap.
enum class ErrorCode {
  invalid_argument = 1,
  config = 2,
  endpoint = 3,
  insufficient_data = 4,
  io = 5,
  decode = 6,
  corruption = 7,
  compile = 8,
  lex = 9,
  domain = 10,
  no_code = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace moeroute
