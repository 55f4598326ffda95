// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

// C sources for the O0 grouping fixture. Three comment/blank variants of a
// free-then-qsort program, two qsort-then-free programs that differ only in
// a dead local's name, and one unrelated insertion sort.

#pragma once

#include <string>
#include <vector>

namespace moeroute::testing {

inline const char* kSortHead = R"(int compare_ints(const void *a, const void *b) {
    int ia = *(const int *)a;
    int ib = *(const int *)b;
    if (ia < ib) return -1;
    if (ia > ib) return 1;
    return 0;
}
void sort_mixed_array(int *arr, int n) {
    int *buf = (int *)malloc(n * sizeof(int));
    if (!buf) return;
    int run_len = 1;
    int i;
    for (i = 1; i < n; i++) {
        if (arr[i] < arr[i-1]) {
            run_len = 1; continue;
        }
        run_len++;
    }
)";

inline std::string free_first(const std::string& note_a, const std::string& note_b) {
  return std::string("#include <stdlib.h>\n") + note_a + kSortHead +
         "    int k = 0;\n"
         "    int run_count = 0;\n" +
         note_b +
         "    free(buf);\n"
         "    qsort(arr, n, sizeof(int), compare_ints);\n"
         "}\n";
}

inline std::string qsort_first(const std::string& dead_name) {
  return std::string("#include <stdlib.h>\n") + kSortHead + "    int " + dead_name +
         " = 0;\n"
         "    int run_count = 0;\n"
         "    qsort(arr, n, sizeof(int), compare_ints);\n"
         "    free(buf);\n"
         "}\n";
}

inline const char* kInsertionSort = R"(void sort_mixed_array(int *arr, int n) {
    for (int i = 1; i < n; i++) {
        int v = arr[i];
        int j = i - 1;
        while (j >= 0 && arr[j] > v) {
            arr[j + 1] = arr[j];
            j--;
        }
        arr[j + 1] = v;
    }
}
)";

struct GroupFixture {
  std::vector<std::string> ids;
  std::vector<std::string> sources;
};

inline GroupFixture six_source_fixture() {
  GroupFixture f;
  f.ids = {"c0", "c1", "c2", "o0", "o1", "x0"};
  f.sources = {
      free_first("", ""),
      free_first("/* sorts in place */\n", "    /* dead code below */\n"),
      free_first("\n\n", "\n"),
      qsort_first("k"),
      qsort_first("len"),
      kInsertionSort,
  };
  return f;
}

// A code body of `code_lines` executable lines with `comment_lines` comment
// lines spread through it.
inline std::string commented_body(int code_lines, int comment_lines) {
  std::string out = "int f(int *a, int n) {\n    int s = 0;\n";
  int emitted = 2, comments = 0;
  int i = 0;
  while (emitted < code_lines - 2) {
    if (comments < comment_lines && (i % 2 == 0 || emitted >= code_lines - 3)) {
      out += "    // step " + std::to_string(comments) + "\n";
      ++comments;
    }
    out += "    s += a[" + std::to_string(i % 7) + "] * " + std::to_string(i + 1) + ";\n";
    ++emitted;
    ++i;
  }
  while (comments < comment_lines) out += "    /* trailing note " + std::to_string(comments++) + " */\n";
  out += "    return s + n;\n}\n";
  return out;
}

}  // namespace moeroute::testing
