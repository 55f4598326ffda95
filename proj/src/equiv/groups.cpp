// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "equiv/groups.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>

#include "common/hash.hpp"
#include "common/text.hpp"
#include "equiv/lexer.hpp"

namespace moeroute::equiv {

namespace {

enum class LineKind { blank, comment, exec };

struct LexedSource {
  std::vector<std::string_view> lines;
  std::vector<LexToken> tokens;
  bool lexed = false;
};

LexedSource prepare(const std::string& src) {
  LexedSource out;
  out.lines = split_lines(src);
  try {
    out.tokens = lex_c(src);
    out.lexed = true;
  } catch (const std::exception&) {
    out.lexed = false;
  }
  return out;
}

LineKind classify_line(const std::string& src, const LexedSource& ls, std::string_view line) {
  if (is_blank(line)) return LineKind::blank;
  if (!ls.lexed) return LineKind::exec;
  const std::size_t begin = static_cast<std::size_t>(line.data() - src.data());
  auto it = std::lower_bound(ls.tokens.begin(), ls.tokens.end(), begin,
                             [](const LexToken& t, std::size_t pos) { return t.end <= pos; });
  for (std::size_t i = 0; i < line.size(); ++i) {
    const std::size_t pos = begin + i;
    while (it != ls.tokens.end() && it->end <= pos) ++it;
    if (std::isspace(static_cast<unsigned char>(line[i]))) continue;
    if (it == ls.tokens.end() || it->cls != LexClass::comment) return LineKind::exec;
  }
  return LineKind::comment;
}

void count(DiffBreakdown& d, LineKind k) {
  switch (k) {
    case LineKind::blank: ++d.blank_lines; break;
    case LineKind::comment: ++d.comment_lines; break;
    case LineKind::exec: ++d.exec_lines; break;
  }
}

}  // namespace

LineDiff diff_lines(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::uint32_t>> L(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      L[i][j] = a[i] == b[j] ? L[i + 1][j + 1] + 1 : std::max(L[i + 1][j], L[i][j + 1]);
  LineDiff d;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else if (L[i + 1][j] >= L[i][j + 1]) {
      d.only_a.push_back(i++);
    } else {
      d.only_b.push_back(j++);
    }
  }
  for (; i < n; ++i) d.only_a.push_back(i);
  for (; j < m; ++j) d.only_b.push_back(j);
  return d;
}

DiffBreakdown classify_diffs(const std::vector<std::string>& sources) {
  DiffBreakdown d;
  if (sources.size() < 2) return d;
  const LexedSource rep = prepare(sources[0]);
  for (std::size_t k = 1; k < sources.size(); ++k) {
    const LexedSource mem = prepare(sources[k]);
    const LineDiff ld = diff_lines(rep.lines, mem.lines);
    for (std::size_t i : ld.only_a) count(d, classify_line(sources[0], rep, rep.lines[i]));
    for (std::size_t j : ld.only_b) count(d, classify_line(sources[k], mem, mem.lines[j]));
  }
  const double total = static_cast<double>(d.total());
  if (total > 0) {
    d.comment_fraction = static_cast<double>(d.comment_lines) / total;
    d.blank_fraction = static_cast<double>(d.blank_lines) / total;
    d.exec_fraction = static_cast<double>(d.exec_lines) / total;
  }
  return d;
}

Grouping group_by_asm(const std::vector<CompiledUnit>& units) {
  std::map<std::string, O0Group> by_hash;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string h = content_hash(units[i].canonical_asm);
    O0Group& g = by_hash[h];
    if (g.members.empty()) {
      g.group_id = h;
      g.representative = units[i].source;
    }
    g.members.push_back(units[i].node_id);
    g.unit_indices.push_back(i);
  }
  Grouping out;
  out.compiled = units.size();
  for (auto& [h, g] : by_hash) {
    if (g.members.size() == 1) ++out.singletons;
    std::vector<std::string> sources;
    sources.reserve(g.unit_indices.size());
    for (std::size_t i : g.unit_indices) sources.push_back(units[i].source);
    g.diff = classify_diffs(sources);
    out.groups.push_back(std::move(g));
  }
  std::stable_sort(out.groups.begin(), out.groups.end(), [](const O0Group& a, const O0Group& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.group_id < b.group_id;
  });
  return out;
}

std::string groups_csv(const Grouping& g) {
  std::string out = "group_id,size,comment_pct,blank_pct,exec_pct\n";
  for (const auto& grp : g.groups) {
    out += grp.group_id + "," + std::to_string(grp.members.size()) + "," + fixed(100.0 * grp.diff.comment_fraction, 4) +
           "," + fixed(100.0 * grp.diff.blank_fraction, 4) + "," + fixed(100.0 * grp.diff.exec_fraction, 4) + "\n";
  }
  return out;
}

}  // namespace moeroute::equiv
