// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace moeroute::equiv {

struct ExtractedCode {
  std::string source;
  /// Byte offset of source[0] within the completion text.
  std::size_t offset = 0;
};

/// Strips a trailing stop token and surrounding markdown fences. Interior
/// bytes are kept. Throws Error(no_code) when nothing but whitespace is left.
ExtractedCode extract_code(std::string_view completion, std::string_view stop_token);

inline constexpr std::string_view kDefaultCompileTemplate = "gcc -S -O0 {in} -o {out}";
inline constexpr std::string_view kStandardPreamble =
    "#include <stdlib.h>\n#include <string.h>\n#include <stdio.h>\n";

struct CompileOptions {
  std::string command_template{kDefaultCompileTemplate};
};

struct CompileResult {
  bool ok = false;
  bool used_preamble = false;
  std::string assembly;
  std::string diagnostics;
};

/// Compiles one source to assembly. On failure retries once with the standard
/// preamble prepended. Never throws on compiler errors; ok=false carries the
/// diagnostics of both attempts.
CompileResult compile_to_asm(std::string_view source, const CompileOptions& opts = {});

/// Compiles every source, running up to `jobs` compiler processes at once.
std::vector<CompileResult> compile_all(const std::vector<std::string>& sources, const CompileOptions& opts = {},
                                       unsigned jobs = 0);

/// Drops `.file` and `.ident` directive lines and trailing whitespace.
std::string normalize_asm(std::string_view assembly);

/// Target triple reported by the compiler named in the template, or
/// "unknown".
std::string compiler_target(const CompileOptions& opts = {});

}  // namespace moeroute::equiv
