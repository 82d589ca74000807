/*
 * Copyright 2026 The calrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libcalrec.
 *
 * Every function returns a calrec_status. On failure a description is
 * available from calrec_last_error() until the next call on the same thread.
 * Objects are opaque handles released with the matching *_free function;
 * passing NULL to a *_free function is a no-op. Handles are immutable once
 * created and may be shared between threads.
 */

#ifndef CALREC_CALREC_H_
#define CALREC_CALREC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CALREC_BUILDING)
#    define CALREC_API __declspec(dllexport)
#  else
#    define CALREC_API __declspec(dllimport)
#  endif
#else
#  define CALREC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum calrec_status {
  CALREC_OK = 0,
  CALREC_ERR_ARGUMENT = 1,    /* invalid argument or config value */
  CALREC_ERR_PARSE = 2,       /* malformed input file */
  CALREC_ERR_LOOKUP = 3,      /* unknown user, item or genre */
  CALREC_ERR_IO = 4,          /* file could not be read or written */
  CALREC_ERR_DIVERGENCE = 5,  /* training objective became non-finite */
  CALREC_ERR_UNDEFINED = 6,   /* correlation of a constant sequence */
  CALREC_ERR_EXPERIMENT = 7,  /* some algorithms of a run failed */
  CALREC_ERR_INTERNAL = 8
} calrec_status;

typedef enum calrec_log_base { CALREC_LOG_NATURAL = 0, CALREC_LOG_BASE2 = 1 } calrec_log_base;

typedef struct calrec_dataset calrec_dataset;
typedef struct calrec_catalog calrec_catalog;
typedef struct calrec_model calrec_model;

CALREC_API const char* calrec_version(void);
CALREC_API const char* calrec_last_error(void);
CALREC_API const char* calrec_status_name(calrec_status status);

/* Datasets (MovieLens "UserID::MovieID::Rating::Timestamp"). */
CALREC_API calrec_status calrec_dataset_parse(const char* text, size_t length, calrec_dataset** out);
CALREC_API calrec_status calrec_dataset_load(const char* path, calrec_dataset** out);
CALREC_API void calrec_dataset_free(calrec_dataset* dataset);
CALREC_API calrec_status calrec_dataset_counts(const calrec_dataset* dataset, size_t* users, size_t* items,
                                               size_t* ratings);
/* Per-user stratified split; both outputs must be freed. */
CALREC_API calrec_status calrec_dataset_split(const calrec_dataset* dataset, double train_fraction, uint64_t seed,
                                              calrec_dataset** train, calrec_dataset** test);
/* Mean train rating of one item. */
CALREC_API calrec_status calrec_dataset_item_mean(const calrec_dataset* dataset, int64_t item, double* out);

/* Item catalogs (MovieLens "MovieID::Title::Genre1|Genre2"). */
CALREC_API calrec_status calrec_catalog_parse(const char* text, size_t length, calrec_catalog** out);
CALREC_API calrec_status calrec_catalog_load(const char* path, calrec_catalog** out);
CALREC_API void calrec_catalog_free(calrec_catalog* catalog);
CALREC_API calrec_status calrec_catalog_genre_count(const calrec_catalog* catalog, size_t* out);
/* Writes the genre distribution of `items` into `mass` (genre_count values,
 * in the catalog's sorted genre order). */
CALREC_API calrec_status calrec_catalog_distribution(const calrec_catalog* catalog, const int64_t* items,
                                                     size_t count, double* mass);

/* Models. `config` is whitespace- or newline-separated key=value pairs, e.g.
 * "algorithm=user_knn k=30 similarity=cosine". The model keeps its own
 * reference to the train data; the dataset handle may be freed afterwards. */
CALREC_API calrec_status calrec_model_fit(const calrec_dataset* train, const char* config, calrec_model** out);
CALREC_API void calrec_model_free(calrec_model* model);
CALREC_API calrec_status calrec_model_score(const calrec_model* model, int64_t user, int64_t item, double* out);
/* Writes up to n recommendations; *count receives the number written. */
CALREC_API calrec_status calrec_model_recommend(const calrec_model* model, int64_t user, size_t n, int64_t* items,
                                                double* scores, size_t* count);
CALREC_API calrec_status calrec_model_save(const calrec_model* model, const char* path);
CALREC_API calrec_status calrec_model_load(const char* path, const calrec_dataset* train, calrec_model** out);

/* Metrics on plain arrays. */
CALREC_API calrec_status calrec_inconsistency(const double* ratings, const double* item_means, size_t count,
                                              double* out);
/* p and q over the same `count` categories; p must sum to 1. */
CALREC_API calrec_status calrec_kl_miscalibration(const double* p, const double* q, size_t count, double alpha,
                                                  calrec_log_base base, double* out);
CALREC_API calrec_status calrec_pearson(const double* xs, const double* ys, size_t count, double* out);

/* Experiment commands. `output_dir` and `seed` override the config when
 * non-NULL. Progress is logged to standard error. */
CALREC_API calrec_status calrec_cmd_split(const char* config_path, const char* output_dir, const uint64_t* seed);
CALREC_API calrec_status calrec_cmd_run(const char* config_path, const char* output_dir, const uint64_t* seed);
/* *report receives a NUL-terminated string released with calrec_string_free. */
CALREC_API calrec_status calrec_cmd_report(const char* output_dir, char** report);
/* Cross-file consistency check of a finished run. *issues receives one
 * message per line (empty when consistent); free with calrec_string_free. */
CALREC_API calrec_status calrec_check_run(const char* output_dir, char** issues);
CALREC_API void calrec_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CALREC_CALREC_H_ */
