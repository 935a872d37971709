/* Copyright 2026 The nfsim Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef NFSIM_NFSIM_H_
#define NFSIM_NFSIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NFSIM_API __declspec(dllexport)
#elif defined(NFSIM_BUILDING_LIBRARY)
#define NFSIM_API __attribute__((visibility("default")))
#else
#define NFSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nfsim_status {
  NFSIM_OK = 0,
  NFSIM_E_INVALID_ARGUMENT = 1,
  NFSIM_E_DOMAIN = 2,
  NFSIM_E_CONFIG = 3,
  NFSIM_E_IO = 4,
  NFSIM_E_FORMAT = 5,
  NFSIM_E_NOT_CONVERGED = 6,
  NFSIM_E_SINGULAR = 7,
  NFSIM_E_INTERNAL = 8,
  NFSIM_E_VALIDATION_FAILED = 9 /* the report is still produced */
} nfsim_status;

typedef enum nfsim_dtype {
  NFSIM_DTYPE_COMPLEX64 = 1, /* interleaved (re, im) float32 */
  NFSIM_DTYPE_FLOAT32 = 2
} nfsim_dtype;

typedef struct nfsim_config nfsim_config;
typedef struct nfsim_report nfsim_report;
typedef struct nfsim_sample nfsim_sample;

NFSIM_API const char *nfsim_version(void);
NFSIM_API const char *nfsim_status_string(nfsim_status status);
/* Message of the last failed call on this thread; "" if none. */
NFSIM_API const char *nfsim_last_error(void);

/* 0 restores the default (NFSIM_THREADS, else hardware concurrency). */
NFSIM_API void nfsim_set_threads(size_t n);
/* JSON-lines diagnostics; NULL closes the log. */
NFSIM_API nfsim_status nfsim_set_log_file(const char *path);

/* Run configuration (INI). Handles are not shared between threads. */
NFSIM_API nfsim_status nfsim_config_create_default(nfsim_config **out);
NFSIM_API nfsim_status nfsim_config_load(const char *path, nfsim_config **out);
NFSIM_API nfsim_status nfsim_config_parse(const char *ini_text, nfsim_config **out);
/* "section.key=value" */
NFSIM_API nfsim_status nfsim_config_set(nfsim_config *cfg, const char *assignment);
NFSIM_API nfsim_status nfsim_config_set_seed(nfsim_config *cfg, uint64_t seed);
/* Canonical effective config; valid until the handle changes or is destroyed. */
NFSIM_API const char *nfsim_config_text(const nfsim_config *cfg);
/* SHA-256 hex of the config without the master seed; same lifetime as nfsim_config_text. */
NFSIM_API const char *nfsim_config_hash(const nfsim_config *cfg);
NFSIM_API void nfsim_config_destroy(nfsim_config *cfg);

/* Reports: human/CSV text plus a JSON summary. */
NFSIM_API const char *nfsim_report_text(const nfsim_report *report);
NFSIM_API const char *nfsim_report_json(const nfsim_report *report);
NFSIM_API void nfsim_report_destroy(nfsim_report *report);

NFSIM_API nfsim_status nfsim_generate(const nfsim_config *cfg, const char *out_dir, nfsim_report **out);
/* fault: NULL/"" for none, "self_term_sign" flips the static self-term. */
NFSIM_API nfsim_status nfsim_validate(const char *fault, uint64_t seed, nfsim_report **out);
/* mode: "stf_input" or "fft4d"; pad_factor 1 or 4 (fft4d only). */
NFSIM_API nfsim_status nfsim_features(const char *dataset_dir, const char *mode, const char *out_dir,
                                      size_t pad_factor, nfsim_report **out);
NFSIM_API nfsim_status nfsim_bench(const size_t *sizes, size_t n_sizes, nfsim_report **out);
NFSIM_API nfsim_status nfsim_verify_dataset(const char *dataset_dir);

/* Dataset sample files. */
NFSIM_API nfsim_status nfsim_sample_read(const char *path, nfsim_sample **out);
NFSIM_API nfsim_status nfsim_sample_write(const char *path, nfsim_dtype dtype, size_t rank, const uint32_t *dims,
                                          const float *data, int32_t label, const char *metadata_json);
NFSIM_API size_t nfsim_sample_rank(const nfsim_sample *s);
/* Copies rank entries into dims. */
NFSIM_API void nfsim_sample_dims(const nfsim_sample *s, uint32_t *dims);
NFSIM_API nfsim_dtype nfsim_sample_dtype(const nfsim_sample *s);
NFSIM_API const float *nfsim_sample_data(const nfsim_sample *s, size_t *n_floats);
NFSIM_API int32_t nfsim_sample_label(const nfsim_sample *s);
NFSIM_API const char *nfsim_sample_metadata(const nfsim_sample *s);
NFSIM_API void nfsim_sample_destroy(nfsim_sample *s);

/* Free-space dyadic Green's function, row-major 3x3 as interleaved (re, im): 18 doubles. */
NFSIM_API nfsim_status nfsim_dyadic_green(const double r[3], const double r_src[3], double frequency_hz,
                                          double out[18]);

#ifdef __cplusplus
}
#endif

#endif /* NFSIM_NFSIM_H_ */
