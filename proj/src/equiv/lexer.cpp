// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "equiv/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "common/error.hpp"

namespace moeroute::equiv {

namespace {

const std::unordered_set<std::string_view>& c11_keywords() {
  static const std::unordered_set<std::string_view> kw = {
      "auto",       "break",     "case",           "char",         "const",    "continue",  "default",
      "do",         "double",    "else",           "enum",         "extern",   "float",     "for",
      "goto",       "if",        "inline",         "int",          "long",     "register",  "restrict",
      "return",     "short",     "signed",         "sizeof",       "static",   "struct",    "switch",
      "typedef",    "union",     "unsigned",       "void",         "volatile", "while",     "_Alignas",
      "_Alignof",   "_Atomic",   "_Bool",          "_Complex",     "_Generic", "_Imaginary", "_Noreturn",
      "_Static_assert", "_Thread_local",
  };
  return kw;
}

constexpr std::array<std::string_view, 23> kMultiOps = {
    ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }
bool space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }
bool punct(unsigned char c) {
  return c == '(' || c == ')' || c == '{' || c == '}' || c == '[' || c == ']' || c == ';' || c == ',';
}

int precedence(LexClass c) {
  switch (c) {
    case LexClass::comment: return 6;
    case LexClass::whitespace: return 5;
    case LexClass::keyword: return 4;
    case LexClass::number: return 3;
    case LexClass::op: return 2;
    case LexClass::punctuation: return 1;
    case LexClass::identifier: return 0;
  }
  return 0;
}

}  // namespace

std::string to_string(LexClass c) {
  switch (c) {
    case LexClass::keyword: return "keyword";
    case LexClass::punctuation: return "punctuation";
    case LexClass::identifier: return "identifier";
    case LexClass::op: return "operator";
    case LexClass::whitespace: return "whitespace";
    case LexClass::comment: return "comment";
    case LexClass::number: return "number";
  }
  return "?";
}

std::vector<LexToken> lex_c(std::string_view s) {
  std::vector<LexToken> out;
  const std::size_t n = s.size();
  std::size_t i = 0;
  auto at = [&](std::size_t k) -> unsigned char { return k < n ? static_cast<unsigned char>(s[k]) : 0; };
  auto push = [&](std::size_t b, std::size_t e, LexClass c, bool lit = false) { out.push_back({b, e, c, lit}); };

  while (i < n) {
    const std::size_t b = i;
    const unsigned char c = at(i);
    if (space(c)) {
      while (i < n && space(at(i))) ++i;
      push(b, i, LexClass::whitespace);
    } else if (c == '/' && at(i + 1) == '/') {
      while (i < n && s[i] != '\n') ++i;
      push(b, i, LexClass::comment);
    } else if (c == '/' && at(i + 1) == '*') {
      const auto close = s.find("*/", i + 2);
      if (close == std::string_view::npos) fail(ErrorCode::lex, "unterminated block comment at offset " + std::to_string(b));
      i = close + 2;
      push(b, i, LexClass::comment);
    } else if (c == '"' || c == '\'') {
      ++i;
      while (i < n && s[i] != static_cast<char>(c) && s[i] != '\n') i += (s[i] == '\\' && i + 1 < n) ? 2 : 1;
      if (i < n && s[i] == static_cast<char>(c)) ++i;
      push(b, i, LexClass::identifier, true);
    } else if (std::isdigit(c) || (c == '.' && std::isdigit(at(i + 1)))) {
      ++i;
      while (i < n) {
        const unsigned char d = at(i);
        const unsigned char prev = at(i - 1);
        if (ident_char(d) || d == '.') {
          ++i;
        } else if ((d == '+' || d == '-') && (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
          ++i;
        } else {
          break;
        }
      }
      push(b, i, LexClass::number);
    } else if (ident_start(c)) {
      while (i < n && ident_char(at(i))) ++i;
      push(b, i, c11_keywords().count(s.substr(b, i - b)) ? LexClass::keyword : LexClass::identifier);
    } else if (punct(c)) {
      ++i;
      push(b, i, LexClass::punctuation);
    } else {
      std::size_t len = 1;
      for (auto op : kMultiOps) {
        if (s.substr(i, op.size()) == op) {
          len = op.size();
          break;
        }
      }
      i += len;
      push(b, i, LexClass::op);
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> comment_spans(const std::vector<LexToken>& tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& t : tokens)
    if (t.cls == LexClass::comment) out.emplace_back(t.begin, t.end);
  return out;
}

std::optional<LexClass> span_class(const std::vector<LexToken>& tokens, std::size_t begin, std::size_t end) {
  if (begin >= end) return std::nullopt;
  std::array<std::size_t, 7> bytes{};
  auto it = std::lower_bound(tokens.begin(), tokens.end(), begin,
                             [](const LexToken& t, std::size_t pos) { return t.end <= pos; });
  for (; it != tokens.end() && it->begin < end; ++it) {
    const std::size_t lo = std::max(begin, it->begin);
    const std::size_t hi = std::min(end, it->end);
    if (hi > lo) bytes[static_cast<std::size_t>(it->cls)] += hi - lo;
  }
  std::optional<LexClass> best;
  std::size_t best_bytes = 0;
  for (LexClass c : kAllLexClasses) {
    const std::size_t b = bytes[static_cast<std::size_t>(c)];
    if (b == 0) continue;
    if (!best || b > best_bytes || (b == best_bytes && precedence(c) > precedence(*best))) {
      best = c;
      best_bytes = b;
    }
  }
  return best;
}

}  // namespace moeroute::equiv
