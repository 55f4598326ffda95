// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace moeroute::equiv {

struct DiffBreakdown {
  std::size_t comment_lines = 0;
  std::size_t blank_lines = 0;
  std::size_t exec_lines = 0;
  double comment_fraction = 0.0;
  double blank_fraction = 0.0;
  double exec_fraction = 0.0;

  std::size_t total() const { return comment_lines + blank_lines + exec_lines; }
};

struct CompiledUnit {
  std::string node_id;
  std::string source;
  std::string canonical_asm;
};

struct O0Group {
  std::string group_id;  // hash of the canonical assembly
  std::vector<std::string> members;
  std::vector<std::size_t> unit_indices;  // positions in the input to group_by_asm
  std::string representative;             // source of the first member
  DiffBreakdown diff;
};

struct Grouping {
  std::vector<O0Group> groups;
  std::size_t compiled = 0;
  std::size_t singletons = 0;

  double singleton_fraction() const {
    return groups.empty() ? 0.0 : static_cast<double>(singletons) / static_cast<double>(groups.size());
  }
};

/// Partitions units by canonical assembly. Groups are sorted by descending
/// size, then by group_id; members keep input order. Each group's diff
/// breakdown is filled in against its representative.
Grouping group_by_asm(const std::vector<CompiledUnit>& units);

/// Lines of `a` and of `b` that fall outside a longest common subsequence of
/// lines.
struct LineDiff {
  std::vector<std::size_t> only_a;
  std::vector<std::size_t> only_b;
};
LineDiff diff_lines(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b);

/// Line-level diff of every member against sources[0], each differing line
/// classed as blank, comment, or exec. A group without differing lines gets
/// all-zero fractions.
DiffBreakdown classify_diffs(const std::vector<std::string>& sources);

/// group_id,size,comment_pct,blank_pct,exec_pct
std::string groups_csv(const Grouping& g);

}  // namespace moeroute::equiv
