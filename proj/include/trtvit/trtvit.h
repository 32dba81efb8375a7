/* Copyright 2026 The trtvit Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libtrtvit. Every call returns a trtvit_status; on failure
 * trtvit_last_error() describes the problem (per thread, valid until the
 * next call on that thread). Objects are opaque and owned by the caller,
 * who releases them with the matching *_free function. Output pointers are
 * written only on success.
 */
#ifndef TRTVIT_TRTVIT_H_
#define TRTVIT_TRTVIT_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define TRTVIT_API __attribute__((visibility("default")))
#else
#define TRTVIT_API
#endif

typedef enum {
  TRTVIT_OK = 0,
  TRTVIT_ERR_INVALID_ARGUMENT = 1,
  TRTVIT_ERR_DIMENSION = 2,
  TRTVIT_ERR_PRECISION = 3,
  TRTVIT_ERR_FORMAT = 4,
  TRTVIT_ERR_IO = 5,
  TRTVIT_ERR_NOT_FOUND = 6,
  TRTVIT_ERR_INTERNAL = 7
} trtvit_status;

typedef enum { TRTVIT_FORMAT_MARKDOWN = 0, TRTVIT_FORMAT_CSV = 1, TRTVIT_FORMAT_JSONL = 2 } trtvit_format;

typedef enum { TRTVIT_STAT_MEDIAN = 0, TRTVIT_STAT_MEAN = 1, TRTVIT_STAT_MIN = 2 } trtvit_statistic;

typedef struct trtvit_arch trtvit_arch;
typedef struct trtvit_model trtvit_model;
typedef struct trtvit_string trtvit_string;

TRTVIT_API const char* trtvit_version(void);
TRTVIT_API const char* trtvit_status_name(trtvit_status status);
TRTVIT_API const char* trtvit_last_error(void);

/* Owned, NUL-terminated text. */
TRTVIT_API const char* trtvit_string_data(const trtvit_string* s);
TRTVIT_API size_t trtvit_string_size(const trtvit_string* s);
TRTVIT_API void trtvit_string_free(trtvit_string* s);

TRTVIT_API size_t trtvit_preset_count(void);
/* NULL when index is out of range. */
TRTVIT_API const char* trtvit_preset_name(size_t index);

/* ---- architectures ---- */
TRTVIT_API trtvit_status trtvit_arch_preset(const char* name, trtvit_arch** out);
TRTVIT_API trtvit_status trtvit_arch_parse(const char* text, trtvit_arch** out);
TRTVIT_API trtvit_status trtvit_arch_load(const char* path, trtvit_arch** out);
TRTVIT_API void trtvit_arch_free(trtvit_arch* arch);
TRTVIT_API const char* trtvit_arch_name(const trtvit_arch* arch);
TRTVIT_API trtvit_status trtvit_arch_emit(const trtvit_arch* arch, trtvit_string** out);
/* TRTVIT_ERR_INVALID_ARGUMENT when the arch does not validate at this
 * resolution; the error text lists every violation, one per line. */
TRTVIT_API trtvit_status trtvit_arch_validate(const trtvit_arch* arch, int64_t resolution);
TRTVIT_API trtvit_status trtvit_arch_count(const trtvit_arch* arch, int64_t resolution, int64_t* params,
                                           int64_t* flops);

/* ---- reports ---- */
TRTVIT_API trtvit_status trtvit_report_describe(const trtvit_arch* arch, int64_t resolution, trtvit_format format,
                                                trtvit_string** out);
/* depth: "stage", "block" or "op". */
TRTVIT_API trtvit_status trtvit_report_count(const trtvit_arch* arch, int64_t resolution, const char* depth,
                                             trtvit_format format, trtvit_string** out);
/* Joins a latency CSV with analytic costs. Block rows are matched against
 * the per-block efficiency grid when include_blocks is set; model rows
 * against every preset and, if given, against `extra` at `resolution`.
 * Fails when the file has no row that matches anything. */
TRTVIT_API trtvit_status trtvit_report_metrics(const char* latency_csv_path, int include_blocks,
                                               const trtvit_arch* extra, int64_t resolution, trtvit_format format,
                                               trtvit_string** out);
/* id: "g1".."g4" or "ratio"; latency_csv_paths may be NULL / count 0. */
TRTVIT_API trtvit_status trtvit_report_compare(const char* id, const char* const* latency_csv_paths,
                                               size_t path_count, trtvit_format format, trtvit_string** out);

/* ---- latency ---- */
typedef struct {
  int warmup;
  int iterations;
  int64_t batch;
  trtvit_statistic statistic;
  uint64_t seed;
} trtvit_bench_config;

/* warmup 10, iterations 50, batch 1, median, seed 0 */
TRTVIT_API trtvit_bench_config trtvit_bench_default_config(void);

typedef struct {
  double latency_ms; /* the configured statistic */
  double min_ms;
  double median_ms;
  double mean_ms;
  double max_ms;
} trtvit_bench_result;

/* csv_out (optional) receives the record as a latency CSV with header. */
TRTVIT_API trtvit_status trtvit_bench_arch(const trtvit_arch* arch, int64_t resolution,
                                           const trtvit_bench_config* config, trtvit_bench_result* result,
                                           trtvit_string** csv_out);
/* kind: conv, maxpool, bottleneck, transformer, mixa, mixb, mixc.
 * ratio applies to mix kinds, sr_ratio to attention-bearing kinds. */
TRTVIT_API trtvit_status trtvit_bench_block(const char* kind, int64_t c_in, int64_t c_out, int64_t hw, double ratio,
                                            int64_t sr_ratio, int64_t kernel, int64_t stride,
                                            const trtvit_bench_config* config, trtvit_bench_result* result,
                                            trtvit_string** csv_out);

/* ---- gradient checks (64-bit) ---- */
typedef struct {
  double max_rel_err;
  int64_t total_coords;
  int64_t checked;
  int64_t skipped_nonsmooth;
  int pass;
} trtvit_gradcheck_result;

/* kind is a block kind name or an op name prefixed with "op:"; c must be a
 * valid width for the kind. worst_out (optional) names the worst coordinate. */
TRTVIT_API trtvit_status trtvit_gradcheck(const char* kind, int64_t c, int64_t hw, uint64_t seed,
                                          trtvit_gradcheck_result* result, trtvit_string** worst_out);
TRTVIT_API size_t trtvit_gradcheck_op_count(void);
TRTVIT_API const char* trtvit_gradcheck_op_name(size_t index);

/* ---- models (32-bit inference) ---- */
TRTVIT_API trtvit_status trtvit_model_create(const trtvit_arch* arch, uint64_t seed, trtvit_model** out);
TRTVIT_API void trtvit_model_free(trtvit_model* model);
TRTVIT_API int64_t trtvit_model_num_classes(const trtvit_model* model);
TRTVIT_API int64_t trtvit_model_in_channels(const trtvit_model* model);
TRTVIT_API trtvit_status trtvit_model_parameter_count(const trtvit_model* model, int64_t* out);
TRTVIT_API trtvit_status trtvit_model_save_weights(const trtvit_model* model, const char* path);
TRTVIT_API trtvit_status trtvit_model_load_weights(trtvit_model* model, const char* path);
/* input: batch x in_channels x h x w floats, row-major; logits receives
 * batch x num_classes floats and logits_len must be at least that. */
TRTVIT_API trtvit_status trtvit_model_forward(const trtvit_model* model, const float* input, int64_t batch, int64_t h,
                                              int64_t w, float* logits, size_t logits_len);

#ifdef __cplusplus
}
#endif

#endif /* TRTVIT_TRTVIT_H_ */
