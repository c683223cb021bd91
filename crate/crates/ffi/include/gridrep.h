/* SPDX-License-Identifier: Apache-2.0 */

#ifndef GRIDREP_H
#define GRIDREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GridrepStatus {
  GRIDREP_STATUS_OK = 0,
  GRIDREP_STATUS_NULL_ARGUMENT = 1,
  GRIDREP_STATUS_INVALID_UTF8 = 2,
  GRIDREP_STATUS_CONFIG = 3,
  GRIDREP_STATUS_RUNTIME = 4,
  GRIDREP_STATUS_OUT_OF_RANGE = 5,
  GRIDREP_STATUS_GOLDEN_FAILED = 6,
  GRIDREP_STATUS_PANIC = 7,
} GridrepStatus;

/**
 * Opaque run configuration.
 */
typedef struct GridrepConfig GridrepConfig;

/**
 * Opaque result of a run.
 */
typedef struct GridrepReport GridrepReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *gridrep_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gridrep_version(void);

/**
 * Default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum GridrepStatus gridrep_config_default(struct GridrepConfig **out);

/**
 * Parses and validates a TOML configuration document.
 *
 * # Safety
 * `toml` must be NUL-terminated; `out` must be writable.
 */
enum GridrepStatus gridrep_config_from_toml(const char *toml, struct GridrepConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle from this library not yet freed.
 */
void gridrep_config_free(struct GridrepConfig *config);

/**
 * # Safety
 * `config` must be a live handle; `strategy` NUL-terminated.
 */
enum GridrepStatus gridrep_config_set_strategy(struct GridrepConfig *config, const char *strategy);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum GridrepStatus gridrep_config_set_seed(struct GridrepConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum GridrepStatus gridrep_config_set_intervals(struct GridrepConfig *config, uint32_t intervals);

/**
 * Runs the configured strategy.
 *
 * # Safety
 * `config` must be a live handle; `out` writable.
 */
enum GridrepStatus gridrep_run(const struct GridrepConfig *config, struct GridrepReport **out);

/**
 * # Safety
 * `report` must be NULL or a handle from this library not yet freed.
 */
void gridrep_report_free(struct GridrepReport *report);

/**
 * Number of intervals in the report, 0 for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
uint32_t gridrep_report_interval_count(const struct GridrepReport *report);

/**
 * Cumulative replica hits per replica created, up to `interval`.
 *
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum GridrepStatus gridrep_report_avg_replica_usage(const struct GridrepReport *report,
                                                    uint32_t interval,
                                                    double *out);

/**
 * Cumulative replicas created up to `interval`.
 *
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum GridrepStatus gridrep_report_replicas_created(const struct GridrepReport *report,
                                                   uint32_t interval,
                                                   uint64_t *out);

/**
 * Mean hops of the requests in `interval`.
 *
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum GridrepStatus gridrep_report_mean_hops(const struct GridrepReport *report,
                                            uint32_t interval,
                                            double *out);

/**
 * The full metrics report as JSON. Free the string with
 * [`gridrep_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` writable.
 */
enum GridrepStatus gridrep_report_to_json(const struct GridrepReport *report, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void gridrep_string_free(char *s);

/**
 * RI for raw inputs under the default fuzzy system. Inputs are expected in
 * [0, 1]; `usage_ratio` is the already normalised usage.
 *
 * # Safety
 * `out` must be writable.
 */
enum GridrepStatus gridrep_infer_ri(double level,
                                    double file_size,
                                    double usage_ratio,
                                    double node_size,
                                    double *out);

/**
 * Runs the worked example; returns `Ok` when every case passes and
 * `GoldenFailed` otherwise.
 */
enum GridrepStatus gridrep_golden(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDREP_H */
