// Copyright (C) 2026 The moeroute Authors
// SPDX-License-Identifier: Apache-2.0

#include "moeroute/moeroute.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "client/gen_client.hpp"
#include "client/prompt.hpp"
#include "client/routed_experts.hpp"
#include "common/error.hpp"
#include "common/text.hpp"
#include "metrics/align.hpp"
#include "metrics/basic.hpp"
#include "metrics/stats.hpp"
#include "mock/builtin.hpp"
#include "mock/mock_server.hpp"
#include "report/analyze.hpp"
#include "search/expand_tree.hpp"
#include "trace/run_store.hpp"

using nlohmann::json;
using namespace moeroute;

struct mr_mock {
  std::unique_ptr<mock::MockServer> server;
  bool started = false;
};

struct mr_store {
  trace::RunStore store;
};

namespace {

thread_local std::string g_last_error;

mr_status set_error(mr_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
mr_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return MR_OK;
  } catch (const Error& e) {
    return set_error(static_cast<mr_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return set_error(MR_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(MR_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(MR_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(MR_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::invalid_argument, what);
}

mock::MockConfig load_mock_config(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return mock::config_by_name(spec.substr(prefix.size()));
  return mock::MockConfig::load(spec);
}

json parse_object(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::config, std::string(what) + " must be a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* mr_version(void) { return "0.1.0"; }
const char* mr_last_error(void) { return g_last_error.c_str(); }
void mr_free(void* p) { std::free(p); }

const char* mr_status_name(mr_status s) {
  switch (s) {
    case MR_OK: return "ok";
    case MR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MR_ERR_CONFIG: return "config";
    case MR_ERR_ENDPOINT: return "endpoint";
    case MR_ERR_INSUFFICIENT_DATA: return "insufficient_data";
    case MR_ERR_IO: return "io";
    case MR_ERR_DECODE: return "decode";
    case MR_ERR_CORRUPTION: return "corruption";
    case MR_ERR_COMPILE: return "compile";
    case MR_ERR_LEX: return "lex";
    case MR_ERR_DOMAIN: return "domain";
    case MR_ERR_NO_CODE: return "no_code";
    case MR_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case MR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

mr_status mr_mock_create(const char* config, mr_mock** out) {
  return guarded([&] {
    require(config && out, "mr_mock_create: null argument");
    auto m = std::make_unique<mr_mock>();
    m->server = std::make_unique<mock::MockServer>(load_mock_config(config));
    *out = m.release();
  });
}

mr_status mr_mock_start(mr_mock* mock, const char* host, int port, int* bound_port) {
  return guarded([&] {
    require(mock, "mr_mock_start: null mock");
    const int p = mock->server->start(host ? host : "127.0.0.1", port);
    mock->started = true;
    if (bound_port) *bound_port = p;
  });
}

mr_status mr_mock_url(const mr_mock* mock, char** url) {
  return guarded([&] {
    require(mock && url, "mr_mock_url: null argument");
    require(mock->started, "mr_mock_url: mock not started");
    *url = dup(mock->server->url());
  });
}

int mr_mock_is_scripted(const mr_mock* mock) { return mock && mock->server->engine().config().scripted() ? 1 : 0; }

mr_status mr_mock_generate(const mr_mock* mock, const char* request_json, char** response_json) {
  return guarded([&] {
    require(mock && request_json && response_json, "mr_mock_generate: null argument");
    json req;
    try {
      req = json::parse(request_json);
    } catch (const json::exception& e) {
      fail(ErrorCode::invalid_argument, e.what());
    }
    *response_json = dup(mock->server->engine().generate(req).dump());
  });
}

void mr_mock_stop(mr_mock* mock) {
  if (mock && mock->started) {
    mock->server->stop();
    mock->started = false;
  }
}

void mr_mock_destroy(mr_mock* mock) {
  mr_mock_stop(mock);
  delete mock;
}

mr_status mr_write_builtin_mock_config(const char* name, const char* path) {
  return guarded([&] {
    require(name && path, "mr_write_builtin_mock_config: null argument");
    std::string_view n(name);
    if (n.rfind("builtin:", 0) == 0) n.remove_prefix(8);
    write_file(path, mock::config_by_name(std::string(n)).to_json().dump(2) + "\n");
  });
}

mr_status mr_write_default_run_config(const char* path) {
  return guarded([&] {
    require(path, "mr_write_default_run_config: null path");
    write_file(path, json(trace::RunConfig{}).dump(2) + "\n");
  });
}

mr_status mr_run(const char* config_path, const char* overrides_json, const char* out_dir, mr_progress_fn progress,
                 void* user, char** summary_json) {
  return guarded([&] {
    require(out_dir, "mr_run: null out_dir");
    json j = json::object();
    if (config_path && *config_path) {
      std::string text;
      try {
        text = read_file(config_path);
      } catch (const Error& e) {
        fail(ErrorCode::config, e.what());
      }
      j = parse_object(text.c_str(), "run config");
    }
    j.update(parse_object(overrides_json, "run overrides"));
    const trace::RunConfig cfg = j.get<trace::RunConfig>();
    cfg.validate();

    client::EndpointProfile profile;
    if (!cfg.endpoint_profile.empty()) profile = client::EndpointProfile::load(cfg.endpoint_profile);
    client::RetryPolicy retry{cfg.max_retries, cfg.retry_backoff};
    auto factory = [&] { return std::make_unique<client::GenClient>(cfg.endpoint_url, profile, retry); };
    search::ProgressFn pf;
    if (progress) pf = [&](const std::string& line) { progress(line.c_str(), user); };

    trace::RunStore store = trace::RunStore::create(out_dir, cfg);
    const search::ExpandResult res = search::expand_tree(cfg, factory, store, pf);
    if (summary_json) {
      json s = res.manifest;
      s["decision_points"] = res.decision_points;
      s["nodes"] = store.size();
      *summary_json = dup(s.dump());
    }
  });
}

mr_status mr_analyze(const char* store_dir, const char* out_dir, const char* options_json, char** report_json) {
  return guarded([&] {
    require(store_dir && out_dir, "mr_analyze: null argument");
    const json o = parse_object(options_json, "analyze options");
    report::AnalyzeOptions opts;
    opts.store_dir = store_dir;
    opts.out_dir = out_dir;
    try {
      if (o.contains("seed")) opts.seed = o.at("seed").get<std::uint64_t>();
      if (o.contains("compiler")) opts.compile.command_template = o.at("compiler").get<std::string>();
      opts.skip_compile = o.value("skip_compile", false);
      opts.pair_cap = o.value("pair_cap", opts.pair_cap);
      opts.bin_width = o.value("bin_width", opts.bin_width);
      if (o.contains("coact_layer")) opts.coact_layer = o.at("coact_layer").get<int>();
      opts.compile_jobs = o.value("compile_jobs", 0u);
    } catch (const json::exception& e) {
      fail(ErrorCode::config, std::string("analyze options: ") + e.what());
    }
    const auto res = report::analyze(opts);
    if (report_json) *report_json = dup(res.report.dump());
  });
}

mr_status mr_validate_report(const char* report_json) {
  return guarded([&] {
    require(report_json, "mr_validate_report: null report");
    report::validate_report(json::parse(report_json));
  });
}

mr_status mr_store_open(const char* dir, mr_store** out) {
  return guarded([&] {
    require(dir && out, "mr_store_open: null argument");
    *out = new mr_store{trace::RunStore::load(dir)};
  });
}

void mr_store_close(mr_store* store) { delete store; }

size_t mr_store_node_count(const mr_store* store) { return store ? store->store.size() : 0; }

size_t mr_store_completed_count(const mr_store* store) {
  if (!store) return 0;
  size_t n = 0;
  for (const auto& [id, node] : store->store.nodes()) n += node.finish == trace::Finish::completed;
  return n;
}

mr_status mr_store_root_id(const mr_store* store, char** id) {
  return guarded([&] {
    require(store && id, "mr_store_root_id: null argument");
    const auto root = store->store.root_id();
    if (!root) fail(ErrorCode::insufficient_data, "store is empty");
    *id = dup(*root);
  });
}

mr_status mr_store_node_ids(const mr_store* store, char** ids) {
  return guarded([&] {
    require(store && ids, "mr_store_node_ids: null argument");
    std::string out;
    for (const auto& [id, node] : store->store.nodes()) out += id + "\n";
    *ids = dup(out);
  });
}

mr_status mr_store_node_json(const mr_store* store, const char* node_id, char** node_json) {
  return guarded([&] {
    require(store && node_id && node_json, "mr_store_node_json: null argument");
    *node_json = dup(json(store->store.node(node_id)).dump());
  });
}

mr_status mr_store_reconstruct_prefix(const mr_store* store, const char* node_id, char** prefix) {
  return guarded([&] {
    require(store && node_id && prefix, "mr_store_reconstruct_prefix: null argument");
    *prefix = dup(store->store.reconstruct_prefix(node_id));
  });
}

size_t mr_store_sibling_pair_count(const mr_store* store) {
  return store ? store->store.extract_sibling_pairs().size() : 0;
}

mr_status mr_jaccard(const int32_t* a, size_t na, const int32_t* b, size_t nb, double* out) {
  return guarded([&] {
    require(out && (a || na == 0) && (b || nb == 0), "mr_jaccard: null argument");
    *out = metrics::jaccard({a, na}, {b, nb});
  });
}

mr_status mr_random_baseline(int n_experts, int k, double* out) {
  return guarded([&] {
    require(out, "mr_random_baseline: null out");
    *out = metrics::random_baseline(n_experts, k);
  });
}

mr_status mr_random_baseline_mc(int n_experts, int k, uint64_t draws, uint64_t seed, double* out) {
  return guarded([&] {
    require(out, "mr_random_baseline_mc: null out");
    *out = metrics::random_baseline_mc(n_experts, k, draws, seed);
  });
}

mr_status mr_effective_experts(const uint64_t* counts, size_t n, double* out) {
  return guarded([&] {
    require(out && (counts || n == 0), "mr_effective_experts: null argument");
    *out = metrics::effective_experts({counts, n});
  });
}

mr_status mr_mann_whitney_u(const double* a, size_t na, const double* b, size_t nb, double* u, double* p) {
  return guarded([&] {
    require((a || na == 0) && (b || nb == 0), "mr_mann_whitney_u: null argument");
    const auto t = metrics::mann_whitney_u({a, na}, {b, nb});
    if (u) *u = t.u;
    if (p) *p = t.p;
  });
}

mr_status mr_align_tokens(const int32_t* a, size_t na, const int32_t* b, size_t nb, mr_position_pair* pairs,
                          size_t cap, size_t* n_pairs, double* coverage) {
  bool short_buffer = false;
  const mr_status st = guarded([&] {
    require((a || na == 0) && (b || nb == 0) && (pairs || cap == 0), "mr_align_tokens: null argument");
    const auto al = metrics::align_tokens({a, na}, {b, nb});
    if (n_pairs) *n_pairs = al.pairs.size();
    if (coverage) *coverage = al.coverage;
    for (size_t i = 0; i < al.pairs.size() && i < cap; ++i)
      pairs[i] = {al.pairs[i].pos_a, al.pairs[i].pos_b, al.pairs[i].kind == metrics::PairKind::same_tok ? 1 : 0};
    short_buffer = al.pairs.size() > cap;
  });
  if (st == MR_OK && short_buffer) return set_error(MR_ERR_BUFFER_TOO_SMALL, "pair buffer too small");
  return st;
}

mr_status mr_encode_routed_experts(const int32_t* ids, size_t n, char** b64) {
  return guarded([&] {
    require((ids || n == 0) && b64, "mr_encode_routed_experts: null argument");
    *b64 = dup(client::encode_routed_experts({ids, n}));
  });
}

mr_status mr_decode_routed_experts(const char* b64, size_t n_tokens, int n_layers, int slots, int n_experts,
                                   int32_t* out, size_t cap) {
  return guarded([&] {
    require(b64 && (out || cap == 0), "mr_decode_routed_experts: null argument");
    const auto t = client::decode_routed_experts(b64, n_tokens, n_layers, slots, n_experts);
    if (t.data().size() > cap) fail(ErrorCode::invalid_argument, "output buffer too small");
    std::copy(t.data().begin(), t.data().end(), out);
  });
}

mr_status mr_build_prefix(const char* system_text, const char* user_text, int thinking_skip, const char* forced_suffix,
                          char** prefix) {
  return guarded([&] {
    require(system_text && user_text && prefix, "mr_build_prefix: null argument");
    *prefix = dup(client::build_prefix(system_text, user_text, thinking_skip != 0, forced_suffix ? forced_suffix : ""));
  });
}

}  // extern "C"
