/* Copyright 2026 The robustm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to robustm.
 *
 * Every call returns an rm_status. On failure the message is available from
 * rm_last_error() on the calling thread until that thread's next call.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with rm_string_free(). Handles are released with their _free
 * function; passing NULL to any _free function is a no-op.
 */

#ifndef ROBUSTM_ROBUSTM_H_
#define ROBUSTM_ROBUSTM_H_

#include <stddef.h>

#if defined(_WIN32)
#define RM_API __declspec(dllexport)
#else
#define RM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rm_status {
  RM_OK = 0,
  RM_NOT_CONVERGED = 1,
  RM_ERR_CONFIG = 2,
  RM_ERR_IO = 3,
  RM_ERR_SHAPE = 4,
  RM_ERR_UNSUPPORTED = 5,
  RM_ERR_RANK = 6,
  RM_ERR_DEGENERATE = 7,
  RM_ERR_UNDEFINED = 8,
  RM_ERR_INTERNAL = 9
} rm_status;

RM_API const char* rm_version(void);
RM_API const char* rm_last_error(void);
RM_API void rm_string_free(char* s);

/* Run configuration: a JSON document overlaid on the defaults. */
typedef struct rm_config rm_config;

/* json_text may be NULL for the defaults. */
RM_API rm_status rm_config_create(const char* json_text, rm_config** out);
RM_API rm_status rm_config_load(const char* path, rm_config** out);
/* Sets one value by JSON pointer, e.g. ("/dgp/n", "200"). The value is JSON
 * text. */
RM_API rm_status rm_config_set(rm_config* config, const char* pointer, const char* json_value);
/* Fully resolved configuration, suitable for feeding back. */
RM_API rm_status rm_config_resolve(const rm_config* config, char** out_json);
RM_API void rm_config_free(rm_config* config);

typedef void (*rm_progress_fn)(int done, int total, void* user);

/* Commands. summary_json may be NULL. */
RM_API rm_status rm_run_simulate(const rm_config* config, const char* out_csv,
                                 char** summary_json);
/* Returns RM_NOT_CONVERGED, with the result still written, when the fit did
 * not converge. */
RM_API rm_status rm_run_fit(const rm_config* config, const char* data_csv, const char* out_json,
                            char** summary_json);
RM_API rm_status rm_run_mc(const rm_config* config, const char* out_csv,
                           const char* markdown_or_null, rm_progress_fn progress, void* user,
                           char** summary_json);
RM_API rm_status rm_run_forecast(const rm_config* config, const char* data_csv,
                                 const char* out_csv, const char* dump_or_null,
                                 char** summary_json);
RM_API rm_status rm_loss_probe(const char* loss, const double* orders, size_t n_orders,
                               double u_min, double u_max, double step, int with_gap,
                               char** out_csv);

/* Loss evaluation. With m <= 0 the unsmoothed loss (order 0) or its
 * subgradient (order 1) is returned; otherwise the mollified derivative of
 * the given order (0, 1 or 2). */
RM_API rm_status rm_loss_eval(const char* loss, double m, double u, int order, double* out);

typedef struct rm_dataset rm_dataset;

/* Negative d1/d2 infer the dimensions from the header. */
RM_API rm_status rm_dataset_read(const char* path, int d1, int d2, rm_dataset** out);
RM_API rm_status rm_dataset_simulate(const rm_config* config, rm_dataset** out);
RM_API rm_status rm_dataset_write(const rm_dataset* data, const char* path);
RM_API int rm_dataset_rows(const rm_dataset* data);
RM_API void rm_dataset_free(rm_dataset* data);

typedef struct rm_fit_result rm_fit_result;

/* On RM_NOT_CONVERGED *out is still set. */
RM_API rm_status rm_fit(const rm_config* config, const rm_dataset* data, rm_fit_result** out);
RM_API int rm_fit_converged(const rm_fit_result* result);
RM_API size_t rm_fit_param_count(const rm_fit_result* result);
/* Flattened parameters in label order; capacity must cover the count. */
RM_API rm_status rm_fit_params(const rm_fit_result* result, double* out, size_t capacity);
RM_API rm_status rm_fit_to_json(const rm_fit_result* result, char** out_json);
RM_API void rm_fit_free(rm_fit_result* result);

#ifdef __cplusplus
}
#endif

#endif /* ROBUSTM_ROBUSTM_H_ */
