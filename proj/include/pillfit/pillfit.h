/* SPDX-FileCopyrightText: 2026 pillfit authors */
/* SPDX-License-Identifier: Apache-2.0 */

/* C interface to the pillfit reconstruction library.
 *
 * Every call returns a pf_status. On failure the message is available from
 * pf_last_error() on the same thread until the next failing call. Strings
 * returned through char** are owned by the caller and released with
 * pf_string_free(). */

#ifndef PILLFIT_PILLFIT_H
#define PILLFIT_PILLFIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_VALIDATION = 1, /* bad configuration, arguments or input data */
  PF_ERR_PARSE = 2,      /* malformed file contents */
  PF_ERR_IO = 3,         /* file system failure */
  PF_ERR_GEOMETRY = 4,   /* degenerate pill */
  PF_ERR_SOLVER = 5,     /* optimization failure */
  PF_ERR_INTERNAL = 6
} pf_status;

typedef struct pf_config pf_config;
typedef struct pf_pills pf_pills;
typedef struct pf_result pf_result;

PF_API const char* pf_version(void);
PF_API const char* pf_last_error(void);
PF_API const char* pf_status_name(pf_status status);
PF_API void pf_string_free(char* s);

/* ---- configuration ---- */

PF_API pf_status pf_config_default(pf_config** out);
PF_API pf_status pf_config_load(const char* path, pf_config** out);
PF_API pf_status pf_config_parse(const char* json, pf_config** out);
PF_API void pf_config_free(pf_config* cfg);
/* Replaces the target source with a CSV/PGM file (format from extension). */
PF_API pf_status pf_config_set_target(pf_config* cfg, const char* path);
PF_API pf_status pf_config_set_output_dir(pf_config* cfg, const char* dir);
PF_API pf_status pf_config_output_dir(const pf_config* cfg, char** out);
PF_API pf_status pf_config_set_threads(pf_config* cfg, int threads);
PF_API pf_status pf_config_to_json(const pf_config* cfg, char** out);

/* ---- pill tables ---- */

/* values: n rows of (px, py, qx, qy, r). */
PF_API pf_status pf_pills_create(const double* values, int n, pf_pills** out);
PF_API pf_status pf_pills_load(const char* path, pf_pills** out);
PF_API pf_status pf_pills_save(const pf_pills* pills, const char* path);
PF_API pf_status pf_pills_to_csv(const pf_pills* pills, char** out);
PF_API int pf_pills_count(const pf_pills* pills);
/* Copies min(n, capacity) rows into values (5 doubles per row). */
PF_API pf_status pf_pills_get(const pf_pills* pills, double* values,
                              int capacity);
PF_API void pf_pills_free(pf_pills* pills);

/* mode: "cross" or "randcross"; theta_max in degrees. The domain, r_min and
 * l_max come from cfg (NULL: defaults). */
PF_API pf_status pf_init(const pf_config* cfg, const char* mode, int n,
                         double r0, double theta_max, uint64_t seed,
                         pf_pills** out);

/* ---- pipeline ---- */

/* Loads the target, builds the initial design and runs the configured
 * stages, heuristics and refinement. No files are written. */
PF_API pf_status pf_run(const pf_config* cfg, pf_result** out);
/* Refinement only, starting from pills. */
PF_API pf_status pf_refine(const pf_config* cfg, const pf_pills* pills,
                           pf_result** out);
/* dir NULL: the config's output_dir. */
PF_API pf_status pf_result_write(const pf_result* res, const char* dir);
PF_API pf_status pf_result_objective(const pf_result* res, double* objective,
                                     double* objective_norm);
PF_API pf_status pf_result_pills(const pf_result* res, pf_pills** out);
/* One line per stage / refinement step, CSV. */
PF_API pf_status pf_result_summary(const pf_result* res, char** out);
PF_API void pf_result_free(pf_result* res);

/* AR/UR table (CSV) of the input pills, plus the pruned and merged design. */
PF_API pf_status pf_heuristics(const pf_config* cfg, const pf_pills* pills,
                               char** report_csv, pf_pills** pruned,
                               pf_pills** merged);

/* ---- verification and studies ---- */

/* Finite-difference report as CSV; all_passed is set to 0 or 1. */
PF_API pf_status pf_gradcheck(const pf_config* cfg, int samples, uint64_t seed,
                              char** report_csv, int* all_passed);

/* kind: "resolution", "quadrature", "hessian" or "count". The target is the
 * config's target pills, or the synthetic five-bar. */
PF_API pf_status pf_study(const pf_config* cfg, const char* kind,
                          char** summary_csv);

#ifdef __cplusplus
}
#endif

#endif
