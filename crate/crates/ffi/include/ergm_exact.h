/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef ERGM_EXACT_H
#define ERGM_EXACT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ErgmStatus {
  ERGM_STATUS_OK = 0,
  ERGM_STATUS_NULL_POINTER = 1,
  ERGM_STATUS_INVALID_INPUT = 2,
  ERGM_STATUS_CAPACITY_EXCEEDED = 3,
  ERGM_STATUS_NO_MLE = 4,
  ERGM_STATUS_NON_CONVERGENCE = 5,
  ERGM_STATUS_NOT_SEPARABLE = 6,
  ERGM_STATUS_VIOLATED_BOUND = 7,
  ERGM_STATUS_CERTIFICATE = 8,
  ERGM_STATUS_CONFIG = 9,
  ERGM_STATUS_CACHE = 10,
  ERGM_STATUS_IO = 11,
  ERGM_STATUS_PANIC = 12,
} ErgmStatus;

typedef enum ErgmStatistic {
  ERGM_STATISTIC_EDGES = 0,
  ERGM_STATISTIC_TRIANGLES = 1,
  ERGM_STATISTIC_TWO_STARS = 2,
  ERGM_STATISTIC_MEAN_DEGREE = 3,
  ERGM_STATISTIC_ISOLATES = 4,
  ERGM_STATISTIC_MAX_DEGREE = 5,
} ErgmStatistic;

typedef enum ErgmVerdict {
  ERGM_VERDICT_RELATIVE_INTERIOR = 0,
  ERGM_VERDICT_RELATIVE_BOUNDARY = 1,
  ERGM_VERDICT_OUTSIDE_HULL = 2,
  ERGM_VERDICT_OUTSIDE_AFFINE_HULL = 3,
} ErgmVerdict;

/**
 * Opaque realizable set.
 */
typedef struct ErgmRealizableSet ErgmRealizableSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Enumerates every graph on `k` vertices and tallies the statistics.
 *
 * # Safety
 * `stats` points to `n_stats` values; `out` is writable.
 */
enum ErgmStatus ergm_realizable_set_new(uint32_t k,
                                        const enum ErgmStatistic *stats,
                                        size_t n_stats,
                                        struct ErgmRealizableSet **out);

/**
 * # Safety
 * `set` is NULL or a handle from [`ergm_realizable_set_new`] not yet freed.
 */
void ergm_realizable_set_free(struct ErgmRealizableSet *set);

/**
 * Number of distinct realizable points; 0 for NULL.
 *
 * # Safety
 * `set` is NULL or a live handle.
 */
size_t ergm_realizable_set_len(const struct ErgmRealizableSet *set);

/**
 * Number of statistics per point; 0 for NULL.
 *
 * # Safety
 * `set` is NULL or a live handle.
 */
size_t ergm_realizable_set_dim(const struct ErgmRealizableSet *set);

/**
 * Total number of graphs, `2^(k(k−1)/2)`; 0 for NULL.
 *
 * # Safety
 * `set` is NULL or a live handle.
 */
uint64_t ergm_realizable_set_total(const struct ErgmRealizableSet *set);

/**
 * Writes point `index` (rounded to double) into `out[0..dim]` and its
 * multiplicity into `multiplicity` (which may be NULL).
 *
 * # Safety
 * `set` is a live handle; `out` has room for `dim` doubles.
 */
enum ErgmStatus ergm_realizable_set_point(const struct ErgmRealizableSet *set,
                                          size_t index,
                                          double *out,
                                          uint64_t *multiplicity);

/**
 * Dimension of the hull of realizable points.
 *
 * # Safety
 * `set` is a live handle; `out` is writable.
 */
enum ErgmStatus ergm_affine_dim(const struct ErgmRealizableSet *set, size_t *out);

/**
 * Classifies the exact target `num[i]/den[i]` against the hull.
 *
 * # Safety
 * `num` and `den` hold `len` values; `out` is writable.
 */
enum ErgmStatus ergm_check_membership(const struct ErgmRealizableSet *set,
                                      const int64_t *num,
                                      const int64_t *den,
                                      size_t len,
                                      enum ErgmVerdict *out);

/**
 * Fits the MLE with default settings, writing `θ̂` into `theta_out[0..len]`.
 * Returns `NoMle` when the target is not in the relative interior.
 *
 * # Safety
 * `num`, `den` and `theta_out` hold `len` values; `iterations` may be NULL.
 */
enum ErgmStatus ergm_fit_mle(const struct ErgmRealizableSet *set,
                             const int64_t *num,
                             const int64_t *den,
                             size_t len,
                             double *theta_out,
                             size_t *iterations);

/**
 * `ℓ(θ) = θ·t − κ(θ)`.
 *
 * # Safety
 * `theta`, `num` and `den` hold `len` values; `out` is writable.
 */
enum ErgmStatus ergm_log_likelihood(const struct ErgmRealizableSet *set,
                                    const double *theta,
                                    const int64_t *num,
                                    const int64_t *den,
                                    size_t len,
                                    double *out);

/**
 * Runs the full pipeline on a TOML configuration. On `Ok`, `*json_out`
 * receives the report (free with [`ergm_string_free`]) and `*exit_code`
 * the command-line exit code it corresponds to.
 *
 * # Safety
 * `config_toml` is a NUL-terminated string; outputs are writable.
 */
enum ErgmStatus ergm_run_report(const char *config_toml, char **json_out, int32_t *exit_code);

/**
 * # Safety
 * `s` is NULL or a string returned by this library, not yet freed.
 */
void ergm_string_free(char *s);

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *ergm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERGM_EXACT_H */
