// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "common/error.hpp"
#include "equiv/compile.hpp"
#include "equiv/groups.hpp"
#include "equiv/lexer.hpp"
#include "fixtures.hpp"

using namespace moeroute;
using namespace moeroute::equiv;

TEST_CASE("extract_code strips the stop token and fences") {
  CHECK(extract_code("```c\nint f(){}\n```</function>", "</function>").source == "int f(){}\n");
  CHECK(extract_code("int f(){}</function>", "</function>").source == "int f(){}");
  const std::string interior = "const char* s = \"```\";\nint g(void){return 1;}\n";
  CHECK(extract_code(interior + "</function>", "</function>").source == interior);
  auto ex = extract_code("```c\nint x;\n```", "</function>");
  CHECK(ex.source == "int x;\n");
  CHECK(ex.offset == 5);
  try {
    extract_code("  \n</function>", "</function>");
    FAIL("expected no_code");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_code);
  }
}

TEST_CASE("lexer: hand-traced statement") {
  const std::string src = "int x = 42; // hi";
  auto toks = lex_c(src);
  std::vector<LexClass> classes;
  for (const auto& t : toks) classes.push_back(t.cls);
  using L = LexClass;
  CHECK(classes == std::vector<LexClass>{L::keyword, L::whitespace, L::identifier, L::whitespace, L::op,
                                         L::whitespace, L::number, L::punctuation, L::whitespace, L::comment});
  CHECK(src.substr(toks.back().begin, toks.back().end - toks.back().begin) == "// hi");
}

TEST_CASE("lexer: comment markers inside literals") {
  auto toks = lex_c("\"/*not a comment*/\"");
  REQUIRE(toks.size() == 1);
  CHECK(toks[0].cls == LexClass::identifier);
  CHECK(toks[0].literal);
  auto ch = lex_c("c = '/'; // x");
  CHECK(ch[4].literal);
  CHECK(ch.back().cls == LexClass::comment);
  CHECK(lex_c("").empty());
}

TEST_CASE("lexer: numbers, operators, keywords") {
  auto toks = lex_c("0x1F 1.5e-3 a->b <<= _Bool");
  std::vector<std::pair<LexClass, std::size_t>> got;
  for (const auto& t : toks)
    if (t.cls != LexClass::whitespace) got.push_back({t.cls, t.end - t.begin});
  using L = LexClass;
  std::vector<std::pair<LexClass, std::size_t>> want{{L::number, 4},     {L::number, 6}, {L::identifier, 1},
                                                      {L::op, 2},         {L::identifier, 1},
                                                      {L::op, 3},         {L::keyword, 5}};
  CHECK(got == want);
}

TEST_CASE("lexer: unterminated block comment reports its offset") {
  try {
    lex_c("int a; /* open");
    FAIL("expected a lex error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::lex);
    CHECK(std::string(e.what()).find("offset 7") != std::string::npos);
  }
}

TEST_CASE("lexer: spans tile every fixture source") {
  auto f = moeroute::testing::six_source_fixture();
  for (const auto& src : f.sources) {
    auto toks = lex_c(src);
    std::size_t at = 0;
    for (const auto& t : toks) {
      CHECK(t.begin == at);
      CHECK(t.end > t.begin);
      at = t.end;
    }
    CHECK(at == src.size());
  }
}

TEST_CASE("span_class prefers the majority class") {
  const std::string src = "x = 1; /* c */";
  auto toks = lex_c(src);
  CHECK(span_class(toks, 0, 1) == LexClass::identifier);
  CHECK(span_class(toks, 7, 14) == LexClass::comment);
  CHECK(span_class(toks, 6, 8) == LexClass::comment);  // one space, one comment byte: comment wins the tie
  CHECK_FALSE(span_class(toks, 14, 14));
}

TEST_CASE("compile smoke") {
  auto r = compile_to_asm("int f(void){return 0;}\n");
  REQUIRE(r.ok);
  CHECK_FALSE(r.used_preamble);
  CHECK(r.assembly.find("f:") != std::string::npos);
}

TEST_CASE("preamble retry rescues missing includes") {
  const char* src = "void s(int *a, int n, int (*c)(const void*, const void*)) {\n"
                    "    int *p = NULL;\n    (void)p;\n    qsort(a, n, sizeof(int), c);\n}\n";
  auto r = compile_to_asm(src);
  CHECK(r.ok);
  CHECK(r.used_preamble);
}

TEST_CASE("invalid source fails with diagnostics") {
  auto r = compile_to_asm("int f( {");
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("normalize_asm") {
  const char* src = "int g(int x){return x*3;}\n";
  auto a = compile_to_asm(src), b = compile_to_asm(src);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  CHECK(normalize_asm(a.assembly) == normalize_asm(b.assembly));
  auto n = normalize_asm(a.assembly);
  CHECK(normalize_asm(n) == n);
  CHECK(n.find(".file") == std::string::npos);
  CHECK(n.find(".ident") == std::string::npos);

  std::string v1 = "\t.file\t\"a.c\"\nf:\n\tret  \n\t.ident\t\"GCC 11\"\n";
  std::string v2 = "\t.file\t\"b.c\"\nf:\n\tret\n\t.ident\t\"GCC 13\"\n";
  CHECK(normalize_asm(v1) == normalize_asm(v2));
  std::string v3 = "f:\n\tnop\n\tret\n";
  CHECK(normalize_asm(v1) != normalize_asm(v3));
}

namespace {

Grouping group_sources(const std::vector<std::string>& ids, const std::vector<std::string>& sources) {
  auto results = compile_all(sources);
  std::vector<CompiledUnit> units;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    REQUIRE_MESSAGE(results[i].ok, results[i].diagnostics);
    units.push_back({ids[i], sources[i], normalize_asm(results[i].assembly)});
  }
  return group_by_asm(units);
}

}  // namespace

TEST_CASE("six-source fixture forms three groups") {
  auto f = moeroute::testing::six_source_fixture();
  auto g = group_sources(f.ids, f.sources);
  REQUIRE(g.groups.size() == 3);
  CHECK(g.groups[0].members == std::vector<std::string>{"c0", "c1", "c2"});
  CHECK(g.groups[1].members == std::vector<std::string>{"o0", "o1"});
  CHECK(g.groups[2].members == std::vector<std::string>{"x0"});
  CHECK(g.singletons == 1);
  const auto& d = g.groups[0].diff;
  CHECK(d.exec_fraction == 0.0);
  CHECK(d.comment_fraction + d.blank_fraction == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.comment_lines == 2);
  CHECK(d.blank_lines == 3);
  std::size_t total = 0;
  for (const auto& grp : g.groups) total += grp.members.size();
  CHECK(total == 6);
}

TEST_CASE("statement order changes the group") {
  auto g = group_sources({"a", "b"}, {moeroute::testing::free_first("", ""), moeroute::testing::qsort_first("k")});
  CHECK(g.groups.size() == 2);
}

TEST_CASE("classify_diffs") {
  SUBCASE("extra comment line") {
    auto d = classify_diffs({"int a;\nint b;\n", "int a;\n// note\nint b;\n"});
    CHECK(d.comment_fraction == 1.0);
    CHECK(d.exec_fraction == 0.0);
  }
  SUBCASE("extra blank line") {
    auto d = classify_diffs({"int a;\nint b;\n", "int a;\n\nint b;\n"});
    CHECK(d.blank_fraction == 1.0);
  }
  SUBCASE("no differing lines") {
    auto d = classify_diffs({"int a;\n", "int a;\n"});
    CHECK(d.total() == 0);
    CHECK(d.comment_fraction + d.blank_fraction + d.exec_fraction == 0.0);
  }
  SUBCASE("comment-only rewrite of a 47-line body") {
    auto a = moeroute::testing::commented_body(47, 3);
    auto b = moeroute::testing::commented_body(47, 112);
    auto d = classify_diffs({a, b});
    CHECK(d.exec_lines == 0);
    CHECK(d.exec_fraction == 0.0);
    CHECK(d.comment_fraction == 1.0);
  }
  SUBCASE("executable change") {
    auto d = classify_diffs({"int a = 1;\n", "int a = 2;\n"});
    CHECK(d.exec_fraction == 1.0);
    CHECK(d.exec_lines == 2);
  }
  SUBCASE("fractions sum to one with mixed differences") {
    auto d = classify_diffs({"int a;\nint b;\n", "int a;\n\n// c\nint b = 0;\n"});
    CHECK(d.comment_fraction + d.blank_fraction + d.exec_fraction == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("diff_lines finds a longest common subsequence") {
  std::vector<std::string_view> a{"x", "y", "z"}, b{"x", "w", "z", "q"};
  auto d = diff_lines(a, b);
  CHECK(d.only_a == std::vector<std::size_t>{1});
  CHECK(d.only_b == std::vector<std::size_t>{1, 3});
}

TEST_CASE("groups csv") {
  Grouping g;
  O0Group grp;
  grp.group_id = "abc";
  grp.members = {"n1", "n2"};
  grp.diff.comment_fraction = 0.5;
  grp.diff.blank_fraction = 0.5;
  g.groups.push_back(grp);
  CHECK(groups_csv(g) == "group_id,size,comment_pct,blank_pct,exec_pct\nabc,2,50.0000,50.0000,0.0000\n");
}
