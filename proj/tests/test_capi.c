/* SPDX-FileCopyrightText: 2026 pillfit authors
 * SPDX-License-Identifier: Apache-2.0 */

/* Exercises the shared library through its C header only. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "pillfit/pillfit.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, \
              #cond);                                             \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void test_errors(void) {
  pf_config* cfg = NULL;
  EXPECT(pf_config_parse("{\"bogus\": 1}", &cfg) == PF_ERR_VALIDATION);
  EXPECT(cfg == NULL);
  EXPECT(strstr(pf_last_error(), "bogus") != NULL);
  EXPECT(pf_config_parse("{", &cfg) == PF_ERR_PARSE);
  EXPECT(pf_config_load("/nonexistent/dir/c.json", &cfg) != PF_OK);
  EXPECT(pf_config_default(NULL) == PF_ERR_VALIDATION);
  EXPECT(strcmp(pf_status_name(PF_OK), "ok") == 0);

  double bad[5] = {0, 0, 1, 0, -0.1};
  pf_pills* p = NULL;
  EXPECT(pf_pills_create(bad, 1, &p) == PF_ERR_GEOMETRY);
  EXPECT(p == NULL);

  /* Missing target file. */
  EXPECT(pf_config_default(&cfg) == PF_OK);
  EXPECT(pf_config_set_target(cfg, "/nonexistent/target.csv") == PF_OK);
  pf_result* res = NULL;
  EXPECT(pf_run(cfg, &res) == PF_ERR_VALIDATION);
  EXPECT(res == NULL);
  EXPECT(pf_config_set_threads(cfg, 0) == PF_ERR_VALIDATION);
  pf_config_free(cfg);
}

static void test_pills(void) {
  double v[10] = {0.1, 0.2, 0.6, 0.2, 0.05, 0.3, 0.3, 0.3, 0.8, 0.07};
  pf_pills* p = NULL;
  EXPECT(pf_pills_create(v, 2, &p) == PF_OK);
  EXPECT(pf_pills_count(p) == 2);
  double back[10];
  EXPECT(pf_pills_get(p, back, 2) == PF_OK);
  EXPECT(memcmp(v, back, sizeof v) == 0);
  char* csv = NULL;
  EXPECT(pf_pills_to_csv(p, &csv) == PF_OK);
  EXPECT(csv && strncmp(csv, "id,px,py,qx,qy,r\n", 17) == 0);
  pf_string_free(csv);

  pf_pills* init = NULL;
  EXPECT(pf_init(NULL, "cross", 8, 0.05, 0.0, 0, &init) == PF_OK);
  EXPECT(pf_pills_count(init) == 8);
  EXPECT(pf_init(NULL, "spiral", 8, 0.05, 0.0, 0, &init) == PF_ERR_VALIDATION);
  pf_pills_free(init);

  char* report = NULL;
  pf_pills *pruned = NULL, *merged = NULL;
  EXPECT(pf_heuristics(NULL, p, &report, &pruned, &merged) == PF_OK);
  EXPECT(report && strncmp(report, "id,area,ar,ur,kept\n", 19) == 0);
  pf_string_free(report);
  pf_pills_free(pruned);
  pf_pills_free(merged);
  pf_pills_free(p);
}

static void test_run(void) {
  const char* json =
      "{\"grid\": {\"nx\": 40, \"ny\": 20},"
      " \"init\": {\"n\": 5},"
      " \"stages\": [{\"name\": \"t\", \"objective\": \"tracking\","
      "              \"tol\": 1e-3, \"max_iter\": 20}],"
      " \"target\": {\"five_bar\": true}}";
  pf_config* cfg = NULL;
  EXPECT(pf_config_parse(json, &cfg) == PF_OK);
  pf_result* res = NULL;
  EXPECT(pf_run(cfg, &res) == PF_OK);
  double f = -1, fn = -1;
  EXPECT(pf_result_objective(res, &f, &fn) == PF_OK);
  EXPECT(f >= 0 && fn >= 0 && fn < f);
  pf_pills* out = NULL;
  EXPECT(pf_result_pills(res, &out) == PF_OK);
  EXPECT(pf_pills_count(out) == 5);
  char* summary = NULL;
  EXPECT(pf_result_summary(res, &summary) == PF_OK);
  EXPECT(summary != NULL);
  pf_string_free(summary);

  char* echo = NULL;
  EXPECT(pf_config_to_json(cfg, &echo) == PF_OK);
  pf_config* again = NULL;
  EXPECT(pf_config_parse(echo, &again) == PF_OK);
  pf_string_free(echo);
  pf_config_free(again);

  pf_pills_free(out);
  pf_result_free(res);
  pf_config_free(cfg);
}

static void test_gradcheck(void) {
  char* csv = NULL;
  int ok = 0;
  EXPECT(pf_gradcheck(NULL, 20, 1, &csv, &ok) == PF_OK);
  EXPECT(ok == 1);
  EXPECT(csv != NULL);
  pf_string_free(csv);
}

int main(void) {
  test_errors();
  test_pills();
  test_run();
  test_gradcheck();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi: all checks passed (%s)\n", pf_version());
  return 0;
}
