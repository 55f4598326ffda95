// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "mock/builtin.hpp"

#include <unordered_set>

#include "common/error.hpp"

namespace moeroute::mock {

namespace {

std::vector<std::string> c_vocab() {
  std::vector<std::string> v;
  for (char c = 32; c < 127; ++c) v.emplace_back(1, c);
  v.insert(v.end(), {
      "\n", "\n\n", "    ", "        ", "            ", "</function>",
      // preprocessor and keywords
      "#include", " <", "stdlib", ".h", "int", " int", "void", " void", "const", "(const", "if", "for", "return",
      " return", "continue", "sizeof", "(int", "(int)", "(!", "free", "qsort", "malloc", " *)", " *)a", " *)b",
      // identifiers
      " compare_ints", " compare_ints);", " sort_mixed_array", "(arr", " arr", " *arr", " n", " n,", " *buf", "buf",
      "(buf);", " ia", " ib", " i", " k", " a", " b", " run_len", " run_count", " count", "arr[i", "arr[i]",
      // operators and punctuation runs
      " =", " <", " >", " -", " *", "++", ");", " {", "()", "++)", "];", " *(", " (", "//",
      // comment words
      " entry", " point", " driver", " code", " main", " routine", " sort", " wrapper", " public", " api", " top",
      " level", " dead", " unused", " spare", " extra", " leftover", " scratch", " state", " done", " finished",
      " sorted", " complete", " ok", " ready", " end", " fin", " eof", " tail", " bye", " stop", " outer", " simple", " old", " temp", " fine", " good", " last", " over",
      // scripted-mode words
      " alpha", " beta", " gamma", " delta", " epsilon", " x", " helper",
  });
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& t : v)
    if (seen.insert(t).second) out.push_back(std::move(t));
  return out;
}

std::vector<Segment> c_sort_segments() {
  auto words = [](const std::string& head, const std::vector<std::string>& ws, const std::string& tail) {
    Segment s;
    for (const auto& w : ws) s.emplace_back(head + w + tail, 1.0);
    return s;
  };
  Segment c1 = words("//", {" entry", " driver", " main", " sort", " public", " top", " outer", " simple"}, " helper\n");
  for (auto& [text, w] : c1) w = 0.6 / static_cast<double>(c1.size());
  c1.emplace_back("\n", 0.4);

  return {
      {{"#include <stdlib.h>\n", 1.0}},
      {{"\n", 0.5}, {"\n\n", 0.5}},
      {{"int compare_ints(const void *a, const void *b) {\n"
        "    int ia = *(const int *)a;\n"
        "    int ib = *(const int *)b;\n"
        "    if (ia < ib) return -1;\n"
        "    if (ia > ib) return 1;\n"
        "    return 0;\n"
        "}\n",
        1.0}},
      c1,
      {{"void sort_mixed_array(int *arr, int n) {\n"
        "    int *buf = (int *)malloc(n * sizeof(int));\n"
        "    if (!buf) return;\n"
        "    int run_len = 1;\n"
        "    for (int i = 1; i < n; i++) {\n"
        "        if (arr[i] < arr[i - 1]) {\n"
        "            run_len = 1;\n"
        "            continue;\n"
        "        }\n"
        "        run_len++;\n"
        "    }\n",
        1.0}},
      words("    //", {" dead", " unused", " spare", " extra", " leftover", " scratch", " old", " temp"}, " state\n"),
      words("    int k =", {" 0", " 1", " 2", " 3", " 4", " 5", " 6", " 7"}, ";\n"),
      {{"    int run_count = 0;\n", 0.5}, {"    int count = 0;\n", 0.5}},
      {{"    free(buf);\n    qsort(arr, n, sizeof(int), compare_ints);\n", 0.5},
       {"    qsort(arr, n, sizeof(int), compare_ints);\n    free(buf);\n", 0.5}},
      words("    //", {" done", " finished", " sorted", " complete", " ok", " ready", " fine", " good"}, "\n"),
      {{"}\n", 1.0}},
      {{"\n", 0.5}, {"\n\n", 0.5}},
      words("//", {" end", " fin", " eof", " tail", " bye", " stop", " last", " over"}, "\n"),
  };
}

MockConfig base_config(std::uint64_t seed) {
  MockConfig c;
  c.vocab = c_vocab();
  c.seed = seed;
  c.index_vocab();
  return c;
}

}  // namespace

std::vector<std::pair<int, double>> crossing_anchors() {
  return {{0, 0.05}, {3, 0.05}, {12, 0.8}, {22, 0.8}, {30, 0.3}, {39, 0.3}};
}

MockConfig builtin_grammar_config(std::uint64_t seed) {
  MockConfig c = base_config(seed);
  c.locality = interpolate_locality(c.n_layers, crossing_anchors());
  c.grammar = compile_segments(c, c_sort_segments());
  c.validate();
  return c;
}

MockConfig builtin_grammar_config_flat(double locality, std::uint64_t seed) {
  MockConfig c = base_config(seed);
  c.locality.assign(static_cast<std::size_t>(c.n_layers), locality);
  c.grammar = compile_segments(c, c_sort_segments());
  c.validate();
  return c;
}

MockConfig scripted_root_dp_config(std::uint64_t seed) {
  MockConfig c = base_config(seed);
  c.locality = interpolate_locality(c.n_layers, crossing_anchors());
  auto id = [&](const char* t) { return *c.find_token(t); };
  std::vector<ScriptStep> steps;
  steps.push_back({{{id(" alpha"), 0.15}, {id(" beta"), 0.13}, {id(" gamma"), 0.10}, {id(" delta"), 0.09},
                    {id(" epsilon"), 0.08}},
                   id(" delta")});
  steps.push_back({{{id("int"), 1.0}}, id("int")});
  steps.push_back({{{id(" x"), 1.0}}, id(" x")});
  steps.push_back({{{id(";"), 1.0}}, id(";")});
  c.script = std::move(steps);
  c.validate();
  return c;
}

MockConfig config_by_name(const std::string& name) {
  if (name == "crossing") return builtin_grammar_config();
  if (name == "scripted") return scripted_root_dp_config();
  if (name == "flat") return builtin_grammar_config_flat(0.0);
  fail(ErrorCode::config, "unknown builtin mock config '" + name + "'");
}

}  // namespace moeroute::mock
