#ifndef SATD_MINER_H
#define SATD_MINER_H

/* Generated by cbindgen from satd-miner-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Effect-size interpretation bands.
 */
typedef enum SatdMagnitude {
  SATD_MAGNITUDE_NEGLIGIBLE = 0,
  SATD_MAGNITUDE_SMALL = 1,
  SATD_MAGNITUDE_MEDIUM = 2,
  SATD_MAGNITUDE_LARGE = 3,
} SatdMagnitude;

/**
 * Keyword matching modes, mirroring the library configuration.
 */
typedef enum SatdMatchMode {
  SATD_MATCH_MODE_WORD_BOUNDARY = 0,
  SATD_MATCH_MODE_SUBSTRING = 1,
} SatdMatchMode;

/**
 * Status codes returned by fallible functions.
 */
typedef enum SatdStatus {
  SATD_STATUS_OK = 0,
  SATD_STATUS_NULL_ARGUMENT = 1,
  SATD_STATUS_INVALID_ARGUMENT = 2,
  SATD_STATUS_INVALID_UTF8 = 3,
  SATD_STATUS_FAILED = 4,
  SATD_STATUS_PANIC = 5,
} SatdStatus;

/**
 * Opaque SATD keyword detector.
 */
typedef struct SatdDetector SatdDetector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never freed.
 */
const char *satd_version(void);

/**
 * The last error message on this thread, or NULL when none is set. The
 * caller owns the returned string and releases it with
 * [`satd_string_free`].
 */
char *satd_last_error_message(void);

/**
 * Release a string previously returned by this library.
 *
 * # Safety
 * `s` must be a pointer returned by a `satd_*` function that documents
 * this contract, and must not be freed twice.
 */
void satd_string_free(char *s);

/**
 * Detector over the bundled keyword list. Returns NULL on failure.
 */
struct SatdDetector *satd_detector_new_default(enum SatdMatchMode mode);

/**
 * Detector over a keyword file (one lowercase pattern per line, `#`
 * comment lines ignored). Returns NULL on failure.
 *
 * # Safety
 * `path` must point to a NUL-terminated string.
 */
struct SatdDetector *satd_detector_from_file(const char *path, enum SatdMatchMode mode);

/**
 * Number of keyword patterns matching the comment text; 0 means the text
 * is not SATD, -1 signals an error.
 *
 * # Safety
 * `detector` must come from a detector constructor and not be freed;
 * `text` must point to a NUL-terminated string.
 */
int32_t satd_detector_match_count(const struct SatdDetector *detector, const char *text);

/**
 * Release a detector.
 *
 * # Safety
 * `detector` must come from a detector constructor and not be freed twice.
 */
void satd_detector_free(struct SatdDetector *detector);

/**
 * Clone prevalence: s_ci5 / (s_original - (s_ci4 - s_ci5)).
 *
 * # Safety
 * `out_rate` must be NULL or point to a writable double.
 */
enum SatdStatus satd_cloning_rate(uint64_t s_original,
                                  uint64_t s_ci4,
                                  uint64_t s_ci5,
                                  double *out_rate);

/**
 * Cochran sample size with finite-population correction at p = 0.5.
 * Confidence must be one of 0.90, 0.95, 0.99.
 *
 * # Safety
 * `out_size` must be NULL or point to a writable uint64.
 */
enum SatdStatus satd_sample_size(uint64_t population,
                                 double confidence,
                                 double interval,
                                 uint64_t *out_size);

/**
 * Two-sided Mann-Whitney U test; writes the U statistic of `x` and the
 * p-value.
 *
 * # Safety
 * `x` and `y` must point to arrays of at least `x_len`/`y_len` doubles.
 */
enum SatdStatus satd_mann_whitney_u(const double *x,
                                    size_t x_len,
                                    const double *y,
                                    size_t y_len,
                                    double *out_statistic,
                                    double *out_p_value);

/**
 * Cliff's delta with its magnitude band.
 *
 * # Safety
 * `x` and `y` must point to arrays of at least `x_len`/`y_len` doubles.
 */
enum SatdStatus satd_cliffs_delta(const double *x,
                                  size_t x_len,
                                  const double *y,
                                  size_t y_len,
                                  double *out_delta,
                                  enum SatdMagnitude *out_magnitude);

/**
 * Run the full pipeline for a TOML or JSON config file.
 *
 * # Safety
 * `config_path` must point to a NUL-terminated string.
 */
enum SatdStatus satd_run_pipeline(const char *config_path);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SATD_MINER_H */
