// Copyright 2026 The TAST Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TAST_TAST_H_
#define TAST_TAST_H_

/* C interface to the test-time adaptation engine.
 *
 * Every fallible call returns a tast_status. On failure the message is
 * available from tast_last_error() on the same thread until the next call.
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function (NULL is accepted). Strings returned through char** are
 * released with tast_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(TAST_BUILDING_LIBRARY)
#define TAST_API __attribute__((visibility("default")))
#else
#define TAST_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tast_status {
  TAST_OK = 0,
  TAST_INVALID_ARGUMENT,
  TAST_ZERO_NORM_VECTOR,
  TAST_DIMENSION_MISMATCH,
  TAST_SHAPE_MISMATCH,
  TAST_INDEX_OUT_OF_RANGE,
  TAST_EMPTY_SUPPORT_SET,
  TAST_NO_PROTOTYPES,
  TAST_EMPTY_BATCH,
  TAST_EMPTY_NEIGHBOR_LIST,
  TAST_BATCH_TOO_SMALL,
  TAST_EMPTY_GRID,
  TAST_BAD_MAGIC,
  TAST_TRUNCATED_FILE,
  TAST_NON_FINITE_VALUE,
  TAST_IO,
  TAST_INTERNAL
} tast_status;

TAST_API const char* tast_status_name(tast_status status);
TAST_API const char* tast_last_error(void);
TAST_API void tast_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

typedef struct tast_config {
  int neighbors;        /* N_s */
  int steps;            /* T */
  int per_class_cap;    /* M, -1 = unlimited */
  int members;          /* N_e */
  double tau;
  double lr;
  uint64_t seed;
  int output_dim;       /* 0 = input dim / 4 */
  int global_cap;       /* TAST-BN support size, -1 = unlimited */
  int fixed_prototypes; /* TAST-BN: classifier rows as prototypes */
  double pl_threshold;  /* PLClf */
} tast_config;

TAST_API void tast_config_default(tast_config* out);
/* Missing keys keep the values already in *config. batch_size may be NULL. */
TAST_API tast_status tast_config_from_json(const char* json, tast_config* config, size_t* batch_size);
TAST_API tast_status tast_config_to_json(const tast_config* config, size_t batch_size, char** out);

/* ---- feature datasets ------------------------------------------------- */

typedef struct tast_dataset tast_dataset;
typedef struct tast_model tast_model;

TAST_API tast_status tast_dataset_read(const char* path, tast_dataset** out);
/* num_classes = 0 infers K from the largest label. */
TAST_API tast_status tast_dataset_read_csv(const char* path, uint32_t num_classes, tast_dataset** out);
TAST_API tast_status tast_dataset_write(const tast_dataset* ds, const char* path);
/* features is rows x dim, row-major; labels may be NULL. */
TAST_API tast_status tast_dataset_create(uint32_t rows, uint32_t dim, uint32_t num_classes,
                                         const float* features, const int32_t* labels,
                                         tast_dataset** out);
TAST_API void tast_dataset_free(tast_dataset* ds);

TAST_API uint32_t tast_dataset_rows(const tast_dataset* ds);
TAST_API uint32_t tast_dataset_dim(const tast_dataset* ds);
TAST_API uint32_t tast_dataset_classes(const tast_dataset* ds);
TAST_API int tast_dataset_has_labels(const tast_dataset* ds);
TAST_API int tast_dataset_has_head(const tast_dataset* ds);
TAST_API int tast_dataset_unit_norm(const tast_dataset* ds);
/* Embeds a linear model's head (W, b) into the dataset; NULL removes it. */
TAST_API tast_status tast_dataset_set_head(tast_dataset* ds, const tast_model* model);
/* Copies rows x dim floats into `out`. */
TAST_API tast_status tast_dataset_copy_features(const tast_dataset* ds, float* out, size_t capacity);

/* ---- synthetic benchmark ---------------------------------------------- */

typedef enum tast_shift {
  TAST_SHIFT_IDENTITY = 0,
  TAST_SHIFT_MEAN = 1,
  TAST_SHIFT_ROTATION = 2,
  TAST_SHIFT_NOISE = 3
} tast_shift;

typedef struct tast_synth_spec {
  size_t classes;
  size_t dim;
  size_t train_per_class;
  size_t validation_per_class;
  size_t test_count;
  double mean_scale;
  double class_std;
  tast_shift shift;
  double shift_scale;
  double rotation_deg;
  double noise_sigma;
  uint64_t seed;
} tast_synth_spec;

TAST_API void tast_synth_spec_default(tast_synth_spec* out);
TAST_API tast_status tast_shift_parse(const char* name, tast_shift* out);
/* Any of the outputs may be NULL. */
TAST_API tast_status tast_synth_generate(const tast_synth_spec* spec, tast_dataset** train,
                                         tast_dataset** validation, tast_dataset** test);

/* ---- source models ---------------------------------------------------- */


typedef struct tast_bn_options {
  size_t hidden_dim;
  size_t output_dim;
  int epochs;
  double lr;
  size_t batch_size;
  uint64_t seed;
} tast_bn_options;

TAST_API void tast_bn_options_default(tast_bn_options* out);
/* train_accuracy may be NULL. */
TAST_API tast_status tast_model_train_linear(const tast_dataset* train, int epochs, double lr,
                                             tast_model** out, double* train_accuracy);
TAST_API tast_status tast_model_train_bn(const tast_dataset* train, const tast_bn_options* options,
                                         tast_model** out, double* train_accuracy);
/* A linear model from the head embedded in a feature file. */
TAST_API tast_status tast_model_from_dataset(const tast_dataset* ds, tast_model** out);
TAST_API tast_status tast_model_load(const char* path, tast_model** out);
TAST_API tast_status tast_model_save(const tast_model* model, const char* path);
TAST_API tast_status tast_model_accuracy(const tast_model* model, const tast_dataset* ds, double* out);
TAST_API int tast_model_has_extractor(const tast_model* model);
TAST_API size_t tast_model_input_dim(const tast_model* model);
TAST_API size_t tast_model_classes(const tast_model* model);
TAST_API void tast_model_free(tast_model* model);

/* ---- online methods ----------------------------------------------------
 * Method names: none, t3a, tast, tast_n, tast_bn, tentclf, plclf.
 */

typedef struct tast_engine tast_engine;

TAST_API tast_status tast_engine_create(const char* method, const tast_model* model,
                                        const tast_config* config, tast_engine** out);
/* rows is n x dim row-major. labels_out holds n entries; probs_out, if not
 * NULL, n x classes. mean_loss may be NULL. */
TAST_API tast_status tast_engine_process(tast_engine* engine, const double* rows, size_t n, size_t dim,
                                         int32_t* labels_out, double* probs_out, double* mean_loss);
TAST_API size_t tast_engine_classes(const tast_engine* engine);
TAST_API size_t tast_engine_min_batch(const tast_engine* engine);
TAST_API void tast_engine_free(tast_engine* engine);

typedef struct tast_run tast_run;

/* Streams the labelled dataset once, scoring each batch after prediction. */
TAST_API tast_status tast_run_online(const char* method, const tast_model* model,
                                     const tast_dataset* test, size_t batch_size,
                                     const tast_config* config, tast_run** out);
TAST_API double tast_run_final_accuracy(const tast_run* run);
TAST_API size_t tast_run_batches(const tast_run* run);
TAST_API tast_status tast_run_write(const tast_run* run, const char* path, int append);
TAST_API void tast_run_free(tast_run* run);

/* Exhaustive search over (N_s, T, M); NULL value lists select the defaults
 * {1,2,4,8} x {1,3} x {1,5,20,50,100,-1}. threads = 0 reads TAFS_THREADS. */
typedef struct tast_grid {
  const int* neighbors;
  size_t neighbors_count;
  const int* steps;
  size_t steps_count;
  const int* per_class_caps;
  size_t per_class_caps_count;
} tast_grid;

TAST_API tast_status tast_grid_search(const char* method, const tast_model* model,
                                      const tast_dataset* validation, const tast_grid* grid,
                                      const tast_config* base, size_t batch_size, size_t threads,
                                      tast_config* best, double* best_accuracy, size_t* evaluated);

/* Summary of a result file; either output may be NULL. */
TAST_API tast_status tast_report(const char* results_path, char** table, char** csv);

#ifdef __cplusplus
}
#endif

#endif  // TAST_TAST_H_
