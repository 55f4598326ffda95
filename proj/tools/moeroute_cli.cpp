// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "moeroute/moeroute.h"

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

int exit_code(mr_status s) {
  switch (s) {
    case MR_OK: return 0;
    case MR_ERR_CONFIG: return 2;
    case MR_ERR_ENDPOINT: return 3;
    case MR_ERR_INSUFFICIENT_DATA: return 4;
    default: return 1;
  }
}

int report_failure(const char* what, mr_status s) {
  std::cerr << "moeroute " << what << ": " << mr_status_name(s) << ": " << mr_last_error() << "\n";
  return exit_code(s);
}

std::string take(char* p) {
  std::string s = p ? p : "";
  mr_free(p);
  return s;
}

struct MockHandle {
  mr_mock* m = nullptr;
  ~MockHandle() {
    if (m) mr_mock_destroy(m);
  }
};

int cmd_serve_mock(const std::string& config, const std::string& host, int port) {
  MockHandle h;
  if (auto s = mr_mock_create(config.c_str(), &h.m)) return report_failure("serve-mock", s);
  int bound = 0;
  if (auto s = mr_mock_start(h.m, host.c_str(), port, &bound)) return report_failure("serve-mock", s);
  char* url = nullptr;
  if (auto s = mr_mock_url(h.m, &url)) return report_failure("serve-mock", s);
  std::cout << "mode: " << (mr_mock_is_scripted(h.m) ? "scripted" : "grammar") << "\n";
  std::cout << "listening on " << take(url) << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  return 0;
}

struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> p_target;
  std::optional<double> timeout;
  std::optional<int> max_concurrent;
  std::string mock;
  bool quiet = false;
};

void print_progress(const char* line, void*) { std::cerr << line << "\n"; }

int cmd_run(const RunFlags& f) {
  nlohmann::json overrides = nlohmann::json::object();
  if (f.seed) overrides["seed"] = *f.seed;
  if (f.p_target) overrides["p_target"] = *f.p_target;
  if (f.timeout) overrides["timeout_seconds"] = *f.timeout;
  if (f.max_concurrent) overrides["max_concurrent"] = *f.max_concurrent;
  if (const char* env = std::getenv("MOEROUTE_ENDPOINT"); env && *env) overrides["endpoint_url"] = env;

  MockHandle h;
  if (!f.mock.empty()) {
    if (auto s = mr_mock_create(f.mock.c_str(), &h.m)) return report_failure("run", s);
    if (auto s = mr_mock_start(h.m, "127.0.0.1", 0, nullptr)) return report_failure("run", s);
    char* url = nullptr;
    if (auto s = mr_mock_url(h.m, &url)) return report_failure("run", s);
    overrides["endpoint_url"] = take(url);
  }

  char* summary = nullptr;
  const auto s = mr_run(f.config.empty() ? nullptr : f.config.c_str(), overrides.dump().c_str(), f.out.c_str(),
                        f.quiet ? nullptr : print_progress, nullptr, &summary);
  if (s) return report_failure("run", s);
  const auto j = nlohmann::json::parse(take(summary));
  const auto& c = j.at("counts");
  std::printf("nodes: %zu (completed %zu, truncated %zu, error %zu)\n", j.value("nodes", std::size_t{0}),
              c.value("completed", std::size_t{0}), c.value("truncated", std::size_t{0}),
              c.value("error", std::size_t{0}));
  std::printf("forks: %zu  decision points: %zu  retokenized: %zu\n", j.value("forks_scheduled", std::size_t{0}),
              j.value("decision_points", std::size_t{0}), j.value("retokenized", std::size_t{0}));
  std::printf("wall time: %.2f s%s\n", j.value("wall_seconds", 0.0), j.value("timed_out", false) ? " (timed out)" : "");
  return 0;
}

struct AnalyzeFlags {
  std::string store;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string compiler;
  bool skip_compile = false;
  std::optional<std::size_t> pair_cap;
  std::optional<int> coact_layer;
};

int cmd_analyze(const AnalyzeFlags& f) {
  nlohmann::json o = nlohmann::json::object();
  if (f.seed) o["seed"] = *f.seed;
  if (!f.compiler.empty()) o["compiler"] = f.compiler;
  if (f.skip_compile) o["skip_compile"] = true;
  if (f.pair_cap) o["pair_cap"] = *f.pair_cap;
  if (f.coact_layer) o["coact_layer"] = *f.coact_layer;
  char* report = nullptr;
  if (auto s = mr_analyze(f.store.c_str(), f.out.c_str(), o.dump().c_str(), &report)) return report_failure("analyze", s);
  const auto r = nlohmann::json::parse(take(report));
  std::cout << "report: " << f.out << "/report.json (" << r["files"].size() << " files)\n";
  if (!r["groups"].is_null())
    std::cout << "O0 groups: " << r["groups"]["count"] << " (singletons " << r["groups"]["singletons"] << ")\n";
  if (!r["layer_conditions"].is_null()) {
    const auto& m = r["layer_conditions"]["all_layer_mean"];
    std::cout << "all-layer mean Jaccard: W_same " << m["W_same"] << "  W_diff " << m["W_diff"] << "  B_same "
              << m["B_same"] << "  B_diff " << m["B_diff"] << "\n";
  }
  std::cout << "random baseline: " << r["random_baseline"]["exact"] << "\n";
  return 0;
}

int cmd_init_config(const std::string& out, const std::string& mock_name, const std::string& mock_out) {
  if (auto s = mr_write_default_run_config(out.c_str())) return report_failure("init-config", s);
  std::cout << "wrote " << out << "\n";
  if (!mock_out.empty()) {
    if (auto s = mr_write_builtin_mock_config(mock_name.c_str(), mock_out.c_str())) return report_failure("init-config", s);
    std::cout << "wrote " << mock_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expert-routing traces over a generation tree"};
  app.require_subcommand(1);

  std::string mock_config, host = "127.0.0.1";
  int port = 0;
  auto* serve = app.add_subcommand("serve-mock", "Serve the mock MoE endpoint");
  serve->add_option("--config", mock_config, "Mock config path or builtin:<crossing|flat|scripted>")->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port, "0 picks a free port");

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Expand a generation tree against an endpoint");
  run->add_option("--config", rf.config, "Run config JSON");
  run->add_option("--out", rf.out, "Output store directory")->required();
  run->add_option("--seed", rf.seed);
  run->add_option("--p-target", rf.p_target);
  run->add_option("--timeout", rf.timeout, "Seconds");
  run->add_option("--max-concurrent", rf.max_concurrent);
  run->add_option("--mock", rf.mock, "Start an in-process mock from this config and use it as the endpoint");
  run->add_flag("--quiet", rf.quiet, "No per-node progress");

  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "Group, align, and report on a run store");
  analyze->add_option("store", af.store, "Run store directory")->required();
  analyze->add_option("--out", af.out, "Report directory")->required();
  analyze->add_option("--seed", af.seed);
  analyze->add_option("--compiler", af.compiler, "Compile command template with {in} and {out}");
  analyze->add_flag("--skip-compile", af.skip_compile, "Sibling analysis only");
  analyze->add_option("--pair-cap", af.pair_cap, "Between-group pair cap");
  analyze->add_option("--coact-layer", af.coact_layer);

  std::string init_out, init_mock = "crossing", init_mock_out;
  auto* init = app.add_subcommand("init-config", "Write a default run config");
  init->add_option("--out", init_out)->required();
  init->add_option("--mock", init_mock, "Builtin mock to export");
  init->add_option("--mock-out", init_mock_out, "Also write the mock config here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*serve) return cmd_serve_mock(mock_config, host, port);
  if (*run) return cmd_run(rf);
  if (*analyze) return cmd_analyze(af);
  if (*init) return cmd_init_config(init_out, init_mock, init_mock_out);
  return 2;
}
