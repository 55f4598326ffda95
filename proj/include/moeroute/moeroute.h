/* Copyright (C) 2026 The moeroute Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to moeroute: a mock MoE endpoint, the generation tree search,
 * and the routing analysis pipeline.
 *
 * Every fallible call returns an mr_status. On failure, mr_last_error()
 * returns a message for the calling thread that stays valid until that
 * thread's next call into the library. Strings returned through char**
 * out-parameters are heap-allocated and must be released with mr_free().
 */
#ifndef MOEROUTE_MOEROUTE_H
#define MOEROUTE_MOEROUTE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MOEROUTE_BUILDING)
#    define MR_API __declspec(dllexport)
#  else
#    define MR_API __declspec(dllimport)
#  endif
#else
#  define MR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mr_status {
  MR_OK = 0,
  MR_ERR_INVALID_ARGUMENT = 1,
  MR_ERR_CONFIG = 2,
  MR_ERR_ENDPOINT = 3,
  MR_ERR_INSUFFICIENT_DATA = 4,
  MR_ERR_IO = 5,
  MR_ERR_DECODE = 6,
  MR_ERR_CORRUPTION = 7,
  MR_ERR_COMPILE = 8,
  MR_ERR_LEX = 9,
  MR_ERR_DOMAIN = 10,
  MR_ERR_NO_CODE = 11,
  MR_ERR_BUFFER_TOO_SMALL = 12,
  MR_ERR_INTERNAL = 99
} mr_status;

typedef struct mr_mock mr_mock;
typedef struct mr_store mr_store;

MR_API const char* mr_version(void);
MR_API const char* mr_last_error(void);
MR_API const char* mr_status_name(mr_status status);
MR_API void mr_free(void* p);

/* ---- mock endpoint ---------------------------------------------------- */

/* `config` is a path to a mock JSON config, or "builtin:<name>" with name one
 * of crossing, flat, scripted. */
MR_API mr_status mr_mock_create(const char* config, mr_mock** out);
/* Binds and serves in background threads. port 0 picks a free port. */
MR_API mr_status mr_mock_start(mr_mock* mock, const char* host, int port, int* bound_port);
/* Base URL, e.g. "http://127.0.0.1:40123". */
MR_API mr_status mr_mock_url(const mr_mock* mock, char** url);
MR_API int mr_mock_is_scripted(const mr_mock* mock);
/* Answers one /generate request body without HTTP. */
MR_API mr_status mr_mock_generate(const mr_mock* mock, const char* request_json, char** response_json);
MR_API void mr_mock_stop(mr_mock* mock);
MR_API void mr_mock_destroy(mr_mock* mock);
MR_API mr_status mr_write_builtin_mock_config(const char* name, const char* path);

/* ---- tree search ------------------------------------------------------ */

MR_API mr_status mr_write_default_run_config(const char* path);

/* Called once per finished node with a one-line summary. */
typedef void (*mr_progress_fn)(const char* line, void* user);

/* Runs the tree search. `config_path` may be NULL for defaults;
 * `overrides_json` may be NULL or a JSON object whose keys replace those of
 * the config file. Writes nodes.jsonl and manifest.json under out_dir.
 * `summary_json`, if not NULL, receives the manifest. */
MR_API mr_status mr_run(const char* config_path, const char* overrides_json, const char* out_dir,
                        mr_progress_fn progress, void* user, char** summary_json);

/* ---- analysis --------------------------------------------------------- */

/* options_json keys (all optional): seed, compiler, skip_compile, pair_cap,
 * bin_width, coact_layer, compile_jobs. `report_json`, if not NULL, receives
 * the report. */
MR_API mr_status mr_analyze(const char* store_dir, const char* out_dir, const char* options_json,
                            char** report_json);
MR_API mr_status mr_validate_report(const char* report_json);

/* ---- run store -------------------------------------------------------- */

MR_API mr_status mr_store_open(const char* dir, mr_store** out);
MR_API void mr_store_close(mr_store* store);
MR_API size_t mr_store_node_count(const mr_store* store);
MR_API size_t mr_store_completed_count(const mr_store* store);
MR_API mr_status mr_store_root_id(const mr_store* store, char** id);
/* Node IDs, one per line, sorted. */
MR_API mr_status mr_store_node_ids(const mr_store* store, char** ids);
MR_API mr_status mr_store_node_json(const mr_store* store, const char* node_id, char** node_json);
MR_API mr_status mr_store_reconstruct_prefix(const mr_store* store, const char* node_id, char** prefix);
MR_API size_t mr_store_sibling_pair_count(const mr_store* store);

/* ---- metrics ---------------------------------------------------------- */

typedef struct mr_position_pair {
  size_t pos_a;
  size_t pos_b;
  int same_token; /* 1 same_tok, 0 diff_tok */
} mr_position_pair;

MR_API mr_status mr_jaccard(const int32_t* a, size_t na, const int32_t* b, size_t nb, double* out);
MR_API mr_status mr_random_baseline(int n_experts, int k, double* out);
MR_API mr_status mr_random_baseline_mc(int n_experts, int k, uint64_t draws, uint64_t seed, double* out);
MR_API mr_status mr_effective_experts(const uint64_t* counts, size_t n, double* out);
MR_API mr_status mr_mann_whitney_u(const double* a, size_t na, const double* b, size_t nb, double* u, double* p);
/* Writes up to `cap` pairs; `n_pairs` receives the full count. Returns
 * MR_ERR_BUFFER_TOO_SMALL if cap is short (pairs is then left partial). */
MR_API mr_status mr_align_tokens(const int32_t* a, size_t na, const int32_t* b, size_t nb, mr_position_pair* pairs,
                                 size_t cap, size_t* n_pairs, double* coverage);

/* ---- wire helpers ----------------------------------------------------- */

MR_API mr_status mr_encode_routed_experts(const int32_t* ids, size_t n, char** b64);
/* Decodes n_tokens * n_layers * slots IDs into `out` (capacity `cap`). */
MR_API mr_status mr_decode_routed_experts(const char* b64, size_t n_tokens, int n_layers, int slots, int n_experts,
                                          int32_t* out, size_t cap);
MR_API mr_status mr_build_prefix(const char* system_text, const char* user_text, int thinking_skip,
                                 const char* forced_suffix, char** prefix);

#ifdef __cplusplus
}
#endif

#endif /* MOEROUTE_MOEROUTE_H */
