/* Copyright (C) 2026 The moeroute Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Exercises the public header from C against the shared library.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "moeroute/moeroute.h"

static int failures = 0;

#define EXPECT(cond)                                                    \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "%s:%d: expectation failed: %s (last error: %s)\n", \
              __FILE__, __LINE__, #cond, mr_last_error());              \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

static int progress_lines = 0;
static void on_progress(const char* line, void* user) {
  (void)line;
  (void)user;
  ++progress_lines;
}

static void test_metrics(void) {
  int32_t a[8] = {0, 1, 2, 3, 4, 5, 6, 7};
  int32_t b[8] = {4, 5, 6, 7, 8, 9, 10, 11};
  double j = -1;
  EXPECT(mr_jaccard(a, 8, a, 8, &j) == MR_OK && j == 1.0);
  EXPECT(mr_jaccard(a, 8, b, 8, &j) == MR_OK && fabs(j - 1.0 / 3.0) < 1e-15);
  EXPECT(mr_jaccard(a, 0, b, 8, &j) == MR_ERR_DOMAIN);
  EXPECT(strlen(mr_last_error()) > 0);

  double base = 0;
  EXPECT(mr_random_baseline(256, 8, &base) == MR_OK && fabs(base - 0.0168979395) < 1e-9);
  EXPECT(mr_random_baseline(8, 9, &base) == MR_ERR_DOMAIN);

  uint64_t counts[2] = {5, 5};
  double eff = 0;
  EXPECT(mr_effective_experts(counts, 2, &eff) == MR_OK && fabs(eff - 2.0) < 1e-12);

  double x[3] = {1, 2, 3}, y[3] = {4, 5, 6}, u = -1, p = -1;
  EXPECT(mr_mann_whitney_u(x, 3, y, 3, &u, &p) == MR_OK && u == 0.0 && fabs(p - 0.1) < 1e-12);

  int32_t s1[3] = {1, 2, 3}, s2[3] = {1, 9, 3};
  mr_position_pair pairs[3];
  size_t n = 0;
  double cov = 0;
  EXPECT(mr_align_tokens(s1, 3, s2, 3, pairs, 3, &n, &cov) == MR_OK && n == 3 && cov == 1.0);
  EXPECT(pairs[0].same_token == 1 && pairs[1].same_token == 0 && pairs[2].same_token == 1);
  EXPECT(mr_align_tokens(s1, 3, s2, 3, pairs, 1, &n, &cov) == MR_ERR_BUFFER_TOO_SMALL && n == 3);
}

static void test_wire(void) {
  int32_t ids[16];
  int32_t back[16];
  char* b64 = NULL;
  for (int i = 0; i < 16; ++i) ids[i] = (i * 37) % 256;
  EXPECT(mr_encode_routed_experts(ids, 16, &b64) == MR_OK && b64 != NULL);
  EXPECT(mr_decode_routed_experts(b64, 2, 1, 8, 256, back, 16) == MR_OK);
  EXPECT(memcmp(ids, back, sizeof ids) == 0);
  EXPECT(mr_decode_routed_experts(b64, 1, 40, 8, 256, back, 16) != MR_OK);
  mr_free(b64);

  char* prefix = NULL;
  EXPECT(mr_build_prefix("s", "u", 1, "int ", &prefix) == MR_OK);
  const char* tail = "<think>\n\n</think>\n\nint ";
  EXPECT(prefix && strlen(prefix) > strlen(tail) && strcmp(prefix + strlen(prefix) - strlen(tail), tail) == 0);
  mr_free(prefix);
}

static void test_run_and_analyze(const char* root) {
  char store_dir[512], out_dir[512], cfg_path[512];
  snprintf(store_dir, sizeof store_dir, "%s/store", root);
  snprintf(out_dir, sizeof out_dir, "%s/report", root);
  snprintf(cfg_path, sizeof cfg_path, "%s/run.json", root);

  mr_mock* mock = NULL;
  EXPECT(mr_mock_create("builtin:scripted", &mock) == MR_OK);
  EXPECT(mr_mock_is_scripted(mock) == 1);
  int port = 0;
  EXPECT(mr_mock_start(mock, "127.0.0.1", 0, &port) == MR_OK && port > 0);
  char* url = NULL;
  EXPECT(mr_mock_url(mock, &url) == MR_OK);

  EXPECT(mr_write_default_run_config(cfg_path) == MR_OK);
  char overrides[512];
  snprintf(overrides, sizeof overrides, "{\"endpoint_url\":\"%s\",\"max_concurrent\":4}", url);
  char* summary = NULL;
  EXPECT(mr_run(cfg_path, overrides, store_dir, on_progress, NULL, &summary) == MR_OK);
  EXPECT(summary && strstr(summary, "\"completed\":4") != NULL);
  EXPECT(progress_lines == 4);
  mr_free(summary);
  mr_free(url);

  mr_store* store = NULL;
  EXPECT(mr_store_open(store_dir, &store) == MR_OK);
  EXPECT(mr_store_node_count(store) == 4);
  EXPECT(mr_store_completed_count(store) == 4);
  EXPECT(mr_store_sibling_pair_count(store) == 3 + 3);
  char* ids = NULL;
  EXPECT(mr_store_node_ids(store, &ids) == MR_OK);
  if (ids) {
    char* nl = strchr(ids, '\n');
    if (nl) *nl = '\0';
    char* prefix = NULL;
    char* node = NULL;
    EXPECT(mr_store_reconstruct_prefix(store, ids, &prefix) == MR_OK);
    EXPECT(mr_store_node_json(store, ids, &node) == MR_OK && strstr(node, "\"node_id\"") != NULL);
    mr_free(prefix);
    mr_free(node);
  }
  mr_free(ids);
  char* node = NULL;
  EXPECT(mr_store_node_json(store, "missing", &node) != MR_OK);
  mr_store_close(store);

  char* report = NULL;
  EXPECT(mr_analyze(store_dir, out_dir, "{\"skip_compile\":true}", &report) == MR_OK);
  EXPECT(report && mr_validate_report(report) == MR_OK);
  mr_free(report);
  EXPECT(mr_validate_report("{}") == MR_ERR_CORRUPTION);
  EXPECT(mr_analyze(store_dir, out_dir, "{not json", NULL) == MR_ERR_CONFIG);

  /* The scripted tree is not C; compiling leaves too few nodes. */
  EXPECT(mr_analyze(store_dir, out_dir, NULL, NULL) == MR_ERR_INSUFFICIENT_DATA);

  mr_mock_stop(mock);
  mr_mock_destroy(mock);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s <scratch-dir>\n", argv[0]);
    return 2;
  }
  EXPECT(strlen(mr_version()) > 0);
  EXPECT(strcmp(mr_status_name(MR_ERR_CONFIG), "config") == 0 || strlen(mr_status_name(MR_ERR_CONFIG)) > 0);

  mr_mock* bad = NULL;
  EXPECT(mr_mock_create("builtin:nope", &bad) == MR_ERR_CONFIG);
  EXPECT(mr_run(NULL, "{\"p_target\":2}", argv[1], NULL, NULL, NULL) == MR_ERR_CONFIG);
  EXPECT(mr_run(NULL, "{\"endpoint_url\":\"http://127.0.0.1:1\",\"max_retries\":1,\"retry_backoff_ms\":1}",
                argv[1], NULL, NULL, NULL) == MR_ERR_ENDPOINT);

  test_metrics();
  test_wire();
  test_run_and_analyze(argv[1]);
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
