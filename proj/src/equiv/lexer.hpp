// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace moeroute::equiv {

enum class LexClass { keyword, punctuation, identifier, op, whitespace, comment, number };

inline constexpr LexClass kAllLexClasses[] = {LexClass::keyword,    LexClass::punctuation, LexClass::identifier,
                                              LexClass::op,         LexClass::whitespace,  LexClass::comment,
                                              LexClass::number};

std::string to_string(LexClass c);

struct LexToken {
  std::size_t begin = 0;
  std::size_t end = 0;
  LexClass cls = LexClass::identifier;
  /// Set on string and char literals, which are bucketed as identifiers.
  bool literal = false;

  bool operator==(const LexToken&) const = default;
};

/// Single-pass C lexer. Spans tile the input. Throws Error(lex) on an
/// unterminated block comment; the message carries its byte offset.
std::vector<LexToken> lex_c(std::string_view source);

/// Byte spans [begin, end) covered by comment tokens.
std::vector<std::pair<std::size_t, std::size_t>> comment_spans(const std::vector<LexToken>& tokens);

/// Class of the byte span [begin, end): the class covering the most bytes,
/// ties broken comment > whitespace > keyword > number > operator >
/// punctuation > identifier. nullopt when the span covers no lexed byte.
std::optional<LexClass> span_class(const std::vector<LexToken>& tokens, std::size_t begin, std::size_t end);

}  // namespace moeroute::equiv
