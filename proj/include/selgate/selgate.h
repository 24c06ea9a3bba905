/* Copyright 2026 The Selgate Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the selgate evaluation harness.
 *
 * Every function returns an sg_status. On failure a message is available from
 * sg_last_error() until the next call on the same thread. Handles are opaque
 * and owned by the caller; free them with the matching *_free function.
 * Functions that fill caller buffers report the required size through
 * `needed` and return SG_ERR_USAGE when the buffer is too small.
 */

#ifndef SELGATE_SELGATE_H_
#define SELGATE_SELGATE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SG_BUILDING_LIBRARY)
#define SG_API __attribute__((visibility("default")))
#else
#define SG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_USAGE = 1,
  SG_ERR_DATA = 2,
  SG_ERR_ADAPTER = 3,
  SG_ERR_IO = 4,
  SG_ERR_INTERNAL = 5
} sg_status;

SG_API const char* sg_last_error(void);
SG_API const char* sg_version(void);

/* ---- corpus ---- */

typedef struct sg_items sg_items;

SG_API sg_status sg_items_load(const char* path, sg_items** out);
SG_API size_t sg_items_count(const sg_items* items);
SG_API void sg_items_free(sg_items* items);

/* Group name ("Causal", "Temporal", "Descriptive") for a category code. The
 * returned string is static. */
SG_API sg_status sg_group_of(const char* code, const char** group);

/* Serialized frozen list (JSON text, NUL-terminated) into buf. */
SG_API sg_status sg_freeze_stratified(const sg_items* items, size_t per_group, uint64_t seed,
                                      char* buf, size_t cap, size_t* needed);

/* ---- evidence ---- */

/* Frame timestamps in seconds for a video of `duration` seconds. */
SG_API sg_status sg_build_plan(const char* condition, double duration, double* timestamps,
                               size_t cap, size_t* count);

/* ---- model gateway ---- */

typedef struct sg_distribution {
  double p[5];
  double p_max;
  double margin;
  double entropy_norm;
} sg_distribution;

SG_API sg_status sg_renormalize(const double logprobs[5], sg_distribution* out);

typedef struct sg_payload {
  int ok;              /* 1 when the text is a valid payload */
  const char* reason;  /* static failure reason name, "none" when ok */
  char choice;         /* 'A'..'E', 0 for null */
  int has_confidence;
  double confidence;
  int abstain;
  int has_span;
  long long span_start;
  long long span_end;
} sg_payload;

/* Strict structured-output parse. Returns SG_OK for both valid and invalid
 * payloads; check out->ok. */
SG_API sg_status sg_parse_json_payload(const char* text, sg_payload* out);

typedef struct sg_log sg_log;

SG_API sg_status sg_log_load(const char* path, sg_log** out);
SG_API size_t sg_log_count(const sg_log* log);
SG_API void sg_log_free(sg_log* log);

/* ---- selective metrics ---- */

typedef enum sg_signal { SG_SIGNAL_AUTO = 0, SG_SIGNAL_SELF = 1, SG_SIGNAL_PMAX = 2 } sg_signal;

typedef struct sg_sweep_point {
  double epsilon;
  double risk;     /* NaN when fewer than min_n accepted */
  double coverage;
  double abstention;
  double acc_cond; /* NaN when fewer than min_n accepted */
  double ece;      /* NaN when fewer than min_n accepted */
  long n_accepted;
} sg_sweep_point;

/* grid == NULL (n_grid ignored) selects the 25-point grid i/24. `out` must
 * hold one point per grid value. */
SG_API sg_status sg_sweep(const sg_log* log, const sg_items* items, const double* grid,
                          size_t n_grid, long min_n, sg_signal signal, sg_sweep_point* out,
                          size_t cap, size_t* count);

/* ---- shift analysis ---- */

typedef enum sg_criterion { SG_FIXED_RISK = 0, SG_FIXED_COVERAGE = 1 } sg_criterion;

typedef struct sg_curve_value {
  double risk;
  double coverage;
  double n;
} sg_curve_value;

typedef struct sg_transfer_result {
  double epsilon_star;
  sg_curve_value source;
  sg_curve_value target;
} sg_transfer_result;

SG_API sg_status sg_threshold_transfer(const sg_sweep_point* source, size_t n_source,
                                       const sg_sweep_point* target, size_t n_target,
                                       sg_criterion criterion, double value,
                                       sg_transfer_result* out);

/* ---- commands ----
 * Each command prints a one-line summary on stdout and writes under out_dir.
 * NULL strings take the documented default. Initialise option structs with
 * the matching *_init function before setting fields. */

typedef struct sg_grid_options {
  const char* grid;   /* NULL: i/24; "N": N points; or "0,0.5,1" */
  long min_n;         /* default 50; 0 disables the NaN rule */
  const char* signal; /* "auto" (default), "self", "pmax" */
} sg_grid_options;

typedef struct sg_freeze_options {
  const char* items;
  size_t per_group; /* default 100 */
  uint64_t seed;
  const char* out;
} sg_freeze_options;
SG_API void sg_freeze_options_init(sg_freeze_options* o);
SG_API sg_status sg_cmd_freeze(const sg_freeze_options* o);

typedef struct sg_plan_options {
  const char* items;
  const char* ids; /* optional frozen list */
  const char* videos;
  const char* condition;
  const char* out_dir; /* default "." */
  const char* decoder; /* decoder executable, default "selgate-decode" */
} sg_plan_options;
SG_API void sg_plan_options_init(sg_plan_options* o);
SG_API sg_status sg_cmd_plan(const sg_plan_options* o);

typedef struct sg_verify_options {
  const char* out_dir;
  const char* condition; /* NULL: all */
} sg_verify_options;
SG_API void sg_verify_options_init(sg_verify_options* o);
SG_API sg_status sg_cmd_extract_verify(const sg_verify_options* o);

typedef struct sg_run_options {
  const char* items;
  const char* ids;
  const char* out_dir;
  const char* condition;
  const char* mode;    /* "json" (default) or "letter" */
  const char* adapter; /* NULL: $WB_ADAPTER_CMD */
  const char* run_id;  /* NULL: <condition>-<mode> */
  const char* prompt_version;
  int parallel;     /* default 1 */
  int no_frames;    /* send requests without frames */
  double timeout_s; /* per response, default 300 */
} sg_run_options;
SG_API void sg_run_options_init(sg_run_options* o);
SG_API sg_status sg_cmd_run(const sg_run_options* o);

typedef struct sg_sweep_options {
  const char* log;
  const char* items;
  const char* out_dir;
  const char* name; /* NULL: log file stem */
  sg_grid_options grid;
  double epsilon; /* reliability diagram threshold, default 17/24 */
} sg_sweep_options;
SG_API void sg_sweep_options_init(sg_sweep_options* o);
SG_API sg_status sg_cmd_sweep(const sg_sweep_options* o);

typedef struct sg_compare_options {
  const char* a; /* predictions log or sweep csv */
  const char* b;
  const char* items;
  const char* out_dir;
  const char* name;
  sg_grid_options grid;
} sg_compare_options;
SG_API void sg_compare_options_init(sg_compare_options* o);
SG_API sg_status sg_cmd_compare(const sg_compare_options* o);

typedef struct sg_matched_options {
  const char* a;
  const char* b;
  const char* items;
  const char* out_dir;
  const char* name;
  const char* signal;
  double tau; /* default 0.9 */
} sg_matched_options;
SG_API void sg_matched_options_init(sg_matched_options* o);
SG_API sg_status sg_cmd_matched(const sg_matched_options* o);

typedef struct sg_transfer_options {
  const char* source;
  const char* target;
  const char* items;
  const char* out_dir;
  const char* name;
  sg_grid_options grid;
  const char* criterion; /* "risk" (default) or "coverage" */
  double value;          /* default 0.10 */
} sg_transfer_options;
SG_API void sg_transfer_options_init(sg_transfer_options* o);
SG_API sg_status sg_cmd_transfer(const sg_transfer_options* o);

typedef struct sg_report_options {
  const char* const* logs;
  size_t n_logs;
  const char* items;
  const char* out_dir;
  const char* name; /* default "report" */
  sg_grid_options grid;
  double epsilon;
} sg_report_options;
SG_API void sg_report_options_init(sg_report_options* o);
SG_API sg_status sg_cmd_report(const sg_report_options* o);

/* ---- oracle adapter ----
 * Seeded synthetic model serving the adapter protocol on stdin/stdout. */

typedef struct sg_oracle_options {
  const char* items;     /* answer key */
  const char* condition; /* the condition the requests belong to */
  uint64_t seed;
  const char* law;       /* "calibrated" (default), "overconfident", "constant" */
  double law_value;      /* bias or constant */
  double base_acc[3];    /* Causal, Temporal, Descriptive */
  double degradation_penalty;
  double spread;
  double confidence_quantum;
  double malformed_rate;
  double letter_mass;
  long crash_after; /* exit after this many responses when > 0 */
} sg_oracle_options;
SG_API void sg_oracle_options_init(sg_oracle_options* o);
/* Returns SG_OK at end of input, SG_ERR_ADAPTER after a deliberate crash. */
SG_API sg_status sg_oracle_serve(const sg_oracle_options* o);

#ifdef __cplusplus
}
#endif

#endif /* SELGATE_SELGATE_H_ */
