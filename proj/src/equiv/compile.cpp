// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "equiv/compile.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <thread>

#include "common/error.hpp"
#include "common/text.hpp"

namespace fs = std::filesystem;

namespace moeroute::equiv {

namespace {

std::string_view trim_ws(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  for (std::size_t p = tmpl.find(key); p != std::string::npos; p = tmpl.find(key, p + value.size())) {
    tmpl.replace(p, key.size(), value);
  }
  return tmpl;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "moeroute-cc-XXXXXX").string();
    if (!mkdtemp(pattern.data())) fail(ErrorCode::io, "cannot create temporary directory");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Attempt {
  bool ok = false;
  std::string assembly;
  std::string diagnostics;
};

Attempt run_compiler(std::string_view source, const CompileOptions& opts) {
  TempDir dir;
  const fs::path in = dir.path() / "unit.c";
  const fs::path out = dir.path() / "unit.s";
  const fs::path diag = dir.path() / "diag.txt";
  write_file(in, source);
  std::string cmd = substitute(opts.command_template, "{in}", shell_quote(in.string()));
  cmd = substitute(cmd, "{out}", shell_quote(out.string()));
  cmd += " >/dev/null 2>" + shell_quote(diag.string());
  const int status = std::system(cmd.c_str());
  Attempt a;
  if (fs::exists(diag)) a.diagnostics = read_file(diag);
  a.ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0 && fs::exists(out);
  if (a.ok) a.assembly = read_file(out);
  if (!a.ok && a.diagnostics.empty()) a.diagnostics = "compiler exited with status " + std::to_string(status);
  return a;
}

}  // namespace

ExtractedCode extract_code(std::string_view completion, std::string_view stop_token) {
  std::string_view s = completion;
  if (!stop_token.empty()) {
    std::string_view tail = s;
    while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.back()))) tail.remove_suffix(1);
    if (tail.size() >= stop_token.size() && tail.substr(tail.size() - stop_token.size()) == stop_token) {
      s = tail.substr(0, tail.size() - stop_token.size());
    }
  }
  // Opening fence: optional leading whitespace, ``` and an info string up to
  // the end of that line.
  std::size_t lead = 0;
  while (lead < s.size() && std::isspace(static_cast<unsigned char>(s[lead]))) ++lead;
  if (s.substr(lead, 3) == "```") {
    const auto nl = s.find('\n', lead);
    s.remove_prefix(nl == std::string_view::npos ? s.size() : nl + 1);
    std::size_t end = s.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    if (end >= 3 && s.substr(end - 3, 3) == "```") s = s.substr(0, end - 3);
  }
  if (trim_ws(s).empty()) fail(ErrorCode::no_code, "completion contains no code");
  return {std::string(s), static_cast<std::size_t>(s.data() - completion.data())};
}

CompileResult compile_to_asm(std::string_view source, const CompileOptions& opts) {
  CompileResult r;
  Attempt raw = run_compiler(source, opts);
  if (raw.ok) {
    r.ok = true;
    r.assembly = std::move(raw.assembly);
    r.diagnostics = std::move(raw.diagnostics);
    return r;
  }
  std::string with_preamble(kStandardPreamble);
  with_preamble += source;
  Attempt pre = run_compiler(with_preamble, opts);
  r.used_preamble = true;
  r.ok = pre.ok;
  r.assembly = std::move(pre.assembly);
  r.diagnostics = raw.diagnostics + (pre.ok ? "" : "\n--- with preamble ---\n" + pre.diagnostics);
  return r;
}

std::vector<CompileResult> compile_all(const std::vector<std::string>& sources, const CompileOptions& opts,
                                       unsigned jobs) {
  std::vector<CompileResult> out(sources.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, sources.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < sources.size(); i = next++) out[i] = compile_to_asm(sources[i], opts);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

std::string normalize_asm(std::string_view assembly) {
  std::string out;
  out.reserve(assembly.size());
  for (std::string_view line : split_lines(assembly)) {
    std::string_view body = line;
    while (!body.empty() && (body.front() == ' ' || body.front() == '\t')) body.remove_prefix(1);
    auto directive = [&](std::string_view d) {
      return body.substr(0, d.size()) == d && (body.size() == d.size() || body[d.size()] == ' ' || body[d.size()] == '\t');
    };
    if (directive(".file") || directive(".ident")) continue;
    out += rtrim(line);
    out += '\n';
  }
  return out;
}

std::string compiler_target(const CompileOptions& opts) {
  const std::string& t = opts.command_template;
  const auto sp = t.find(' ');
  const std::string cc = t.substr(0, sp);
  std::string cmd = cc + " -dumpmachine 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return "unknown";
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = pclose(p);
  std::string_view v = trim_ws(out);
  if (status != 0 || v.empty()) return "unknown";
  return std::string(v);
}

}  // namespace moeroute::equiv
