// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace moeroute {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n'; a trailing newline does not produce an empty last line.
std::vector<std::string_view> split_lines(std::string_view text);

std::string_view rtrim(std::string_view s);
bool is_blank(std::string_view s);

/// printf-style "%.6f" without locale surprises; NaN renders as "nan".
std::string fixed(double v, int digits = 6);

}  // namespace moeroute
