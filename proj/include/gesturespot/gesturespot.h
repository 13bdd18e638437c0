/* Copyright 2026 The gesturespot Authors
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

#ifndef GESTURESPOT_GESTURESPOT_H_
#define GESTURESPOT_GESTURESPOT_H_

/* Stable C interface. Every object is an opaque handle owned by the caller
 * and released with its *_free function (NULL is accepted). Functions return
 * a gs_status; on failure gs_last_error() describes the problem for the
 * calling thread until its next failing call. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GS_BUILDING_LIBRARY)
#define GS_API __declspec(dllexport)
#else
#define GS_API __declspec(dllimport)
#endif
#else
#define GS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
  GS_OK = 0,
  GS_ERR_INVALID_ARGUMENT = 1,
  GS_ERR_PARSE = 2,
  GS_ERR_IO = 3,
  GS_ERR_VALIDATION = 4,
  GS_ERR_NUMERIC = 5,
  GS_ERR_INTERNAL = 6
} gs_status;

typedef struct gs_config gs_config;
typedef struct gs_dataset gs_dataset;
typedef struct gs_model gs_model;
typedef struct gs_predictions gs_predictions;
typedef struct gs_report gs_report;

typedef struct gs_timing {
  size_t steps;
  double mean_ms;
  double p50_ms;
  double p95_ms;
  double max_ms;
} gs_timing;

typedef struct gs_aggregate {
  int classes;
  double detection_rate; /* NaN when undefined */
  double fp_score;
  double jaccard;
  double delay_from_start;
  double delay_from_end;
} gs_aggregate;

GS_API const char* gs_version(void);
GS_API const char* gs_last_error(void);
GS_API const char* gs_status_name(gs_status status);

/* Run configuration (key=value; see the README for keys). */
GS_API gs_status gs_config_create(gs_config** out);
GS_API void gs_config_free(gs_config* config);
GS_API gs_status gs_config_set(gs_config* config, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated); *needed receives the full size. */
GS_API gs_status gs_config_get(const gs_config* config, const char* key, char* buf, size_t size, size_t* needed);
GS_API gs_status gs_config_load_file(gs_config* config, const char* path);
GS_API gs_status gs_config_write_file(const gs_config* config, const char* path);

/* Datasets: generated or read from a directory with annotations.txt and
 * sequences/<id>.txt. */
GS_API gs_status gs_dataset_generate(const gs_config* config, gs_dataset** out);
GS_API gs_status gs_dataset_load(const char* dir, gs_dataset** out);
/* Also writes manifest.txt for generated datasets. */
GS_API gs_status gs_dataset_save(const gs_dataset* dataset, const char* dir);
GS_API size_t gs_dataset_size(const gs_dataset* dataset);
GS_API void gs_dataset_free(gs_dataset* dataset);

/* Training. */
GS_API gs_status gs_model_train(const gs_dataset* dataset, const gs_config* config, gs_model** out);
GS_API gs_status gs_model_load(const char* path, gs_model** out);
GS_API gs_status gs_model_save(const gs_model* model, const char* path);
GS_API gs_status gs_model_write_curve(const gs_model* model, const char* path);
/* Training log lines joined by newlines ("" for loaded models). */
GS_API const char* gs_model_log(const gs_model* model);
GS_API size_t gs_model_parameter_count(const gs_model* model);
/* The run configuration the model was trained with. */
GS_API gs_status gs_model_config(const gs_model* model, gs_config** out);
GS_API void gs_model_free(gs_model* model);

/* Parameter count of a classifier with the default architecture and the
 * given input dimension, window, and class count. */
GS_API size_t gs_tcn_parameter_count(int input_dim, int window, int classes);

/* Detection. timing may be NULL. */
GS_API gs_status gs_detect(const gs_model* model, const gs_dataset* dataset, const gs_config* config,
                           gs_predictions** out, gs_timing* timing);
GS_API gs_status gs_predictions_load(const char* path, gs_predictions** out);
GS_API gs_status gs_predictions_save(const gs_predictions* predictions, const char* path);
/* Ground truth of a dataset, echoed as predictions (last frame = end). */
GS_API gs_status gs_predictions_from_dataset(const gs_dataset* dataset, gs_predictions** out);
GS_API size_t gs_predictions_count(const gs_predictions* predictions);
GS_API void gs_predictions_free(gs_predictions* predictions);

/* Evaluation against a dataset's annotations. */
GS_API gs_status gs_evaluate(const gs_dataset* truth, const gs_predictions* predictions, double min_overlap,
                             gs_report** out);
GS_API gs_status gs_report_write_csv(const gs_report* report, const char* path);
/* Human-readable table; the pointer stays valid until the report is freed. */
GS_API const char* gs_report_to_string(const gs_report* report);
GS_API gs_status gs_report_aggregate(const gs_report* report, gs_aggregate* out);
GS_API void gs_report_free(gs_report* report);

/* Detection rate as a function of the minimum overlap ratio. */
GS_API gs_status gs_sweep_write_csv(const gs_dataset* truth, const gs_predictions* predictions,
                                    const double* thresholds, size_t count, const char* path);

/* Per-frame feature CSV for one sequence of the dataset. */
GS_API gs_status gs_features_dump(const gs_dataset* dataset, const char* sequence_id, const char* feature_set,
                                  const char* path);

#ifdef __cplusplus
}
#endif

#endif /* GESTURESPOT_GESTURESPOT_H_ */
