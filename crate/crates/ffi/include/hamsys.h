#ifndef HAMSYS_H
#define HAMSYS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every entry point.
 */
typedef enum HamsysStatus {
  HAMSYS_STATUS_OK = 0,
  HAMSYS_STATUS_NULL_POINTER = 1,
  HAMSYS_STATUS_INVALID_UTF8 = 2,
  HAMSYS_STATUS_PARSE = 3,
  HAMSYS_STATUS_SPEC = 4,
  HAMSYS_STATUS_VALIDATION = 5,
  HAMSYS_STATUS_NUMERICAL = 6,
  HAMSYS_STATUS_PRECONDITION = 7,
  HAMSYS_STATUS_UNKNOWN_ID = 8,
  HAMSYS_STATUS_INCONCLUSIVE = 9,
  HAMSYS_STATUS_BUFFER_TOO_SMALL = 10,
  HAMSYS_STATUS_PANIC = 11,
  /**
   * An example did not reproduce its expected results.
   */
  HAMSYS_STATUS_MISMATCH = 12,
} HamsysStatus;

/**
 * Opaque problem handle.
 */
typedef struct HamsysProblem HamsysProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version (static string).
 */
const char *hamsys_version(void);

/**
 * Message of the last failure on this thread (empty after a success).
 * Valid until the next call on the same thread.
 */
const char *hamsys_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hamsys_string_free(char *s);

/**
 * Parse a JSON specification.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum HamsysStatus hamsys_problem_from_json(const char *json, struct HamsysProblem **out);

/**
 * Problem of a shipped example.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` a valid pointer.
 */
enum HamsysStatus hamsys_problem_from_example(const char *id, struct HamsysProblem **out);

/**
 * Release a problem handle.
 *
 * # Safety
 * `p` must come from `hamsys_problem_from_*` and not have been freed.
 */
void hamsys_problem_free(struct HamsysProblem *p);

/**
 * Dimension n of the first-order system (2n for an embedded
 * Sturm–Liouville problem of block size n).
 *
 * # Safety
 * `p` must be a live handle; `n` a valid pointer.
 */
enum HamsysStatus hamsys_problem_dimension(const struct HamsysProblem *p, uintptr_t *n);

/**
 * Structural validation.  `acceptable` is false on a hard failure;
 * `passed` additionally requires every condition within τ_struct.
 *
 * # Safety
 * `p` must be a live handle; the out-pointers valid or null.
 */
enum HamsysStatus hamsys_validate(const struct HamsysProblem *p, bool *acceptable, bool *passed);

/**
 * Rank of the Gram matrices on the interval and definiteness.  Returns
 * `Inconclusive` (with the outputs set) if the rank did not stabilize.
 *
 * # Safety
 * `p` must be a live handle; the out-pointers valid or null.
 */
enum HamsysStatus hamsys_rank(const struct HamsysProblem *p, uintptr_t *rank, bool *definite);

/**
 * Formal deficiency indices `ñ±` and `N±` on the problem's interval
 * (both ends for a full line).  Returns `Inconclusive` (with the outputs
 * set) if some trajectory could not be classified.
 *
 * # Safety
 * `p` must be a live handle; the out-pointers valid or null.
 */
enum HamsysStatus hamsys_deficiency(const struct HamsysProblem *p,
                                    uintptr_t *n_tilde_plus,
                                    uintptr_t *n_tilde_minus,
                                    int64_t *deficiency_plus,
                                    int64_t *deficiency_minus);

/**
 * Fundamental matrix `Y(x, λ)` (with `Y(x0) = I`), written row-major as
 * interleaved `(re, im)` pairs into `out`, which must hold `2·n·n`
 * doubles (`len` is its length in doubles).
 *
 * # Safety
 * `p` must be a live handle; `out` must point to `len` doubles.
 */
enum HamsysStatus hamsys_fundamental_matrix(const struct HamsysProblem *p,
                                            double lambda_re,
                                            double lambda_im,
                                            double x,
                                            double *out,
                                            uintptr_t len);

/**
 * Full analysis as a JSON report.  The report is written even when the
 * analysis ends in a validation failure (`Validation`) or is inconclusive
 * (`Inconclusive`).
 *
 * # Safety
 * `p` must be a live handle; `json_out` a valid pointer.
 */
enum HamsysStatus hamsys_analyze(const struct HamsysProblem *p, char **json_out);

/**
 * Evaluate one criterion; the verdict is returned as JSON.
 *
 * # Safety
 * `p` must be a live handle, `id` NUL-terminated, `json_out` valid.
 */
enum HamsysStatus hamsys_criterion_evaluate(const struct HamsysProblem *p,
                                            const char *id,
                                            char **json_out);

/**
 * Number of registered criteria.
 */
uintptr_t hamsys_criteria_count(void);

/**
 * Id of the `index`-th registered criterion (static string), or null.
 */
const char *hamsys_criterion_id(uintptr_t index);

/**
 * Run a shipped example and compare with its expected results.
 *
 * # Safety
 * `id` must be NUL-terminated; `passed` valid or null.
 */
enum HamsysStatus hamsys_example_run(const char *id, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAMSYS_H */
