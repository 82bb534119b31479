/* C interface to the hflc controller library. Generated — do not edit. */

#ifndef HFLC_H
#define HFLC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this API.
 *
 * The numeric values match the exit codes of the `hflc` binary, so a
 * caller can reuse one error table for both.
 */
typedef enum HflcStatus {
  /**
   * The call succeeded.
   */
  HFLC_STATUS_OK = 0,
  /**
   * A bad argument: unknown controller, wrong input count, null
   * pointer, or a malformed model file.
   */
  HFLC_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The file could not be read.
   */
  HFLC_STATUS_IO = 2,
  /**
   * Evaluation failed numerically (for example, no rule fires at the
   * requested point).
   */
  HFLC_STATUS_NUMERICAL = 3,
  /**
   * An unexpected internal failure; please report these.
   */
  HFLC_STATUS_INTERNAL = 4,
} HflcStatus;

/**
 * Opaque handle to a loaded controller hierarchy.
 */
typedef struct HflcModel HflcModel;

/**
 * One leg's joint angles (radians) and ankle position (metres).
 */
typedef struct HflcLegState {
  double beta;
  double gamma;
  double ankle_x;
  double ankle_y;
} HflcLegState;

/**
 * Signals for both legs: the chain's warm start and its result.
 */
typedef struct HflcChainState {
  struct HflcLegState left;
  struct HflcLegState right;
} HflcChainState;

/**
 * Outcome of one chain resolution.
 */
typedef struct HflcChainResult {
  struct HflcChainState signals;
  /**
   * Sweeps actually performed.
   */
  size_t iterations;
  /**
   * Whether the last sweep changed no signal by more than the
   * tolerance.
   */
  bool converged;
  /**
   * Largest absolute signal change during the final sweep.
   */
  double residual;
} HflcChainResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hflc_version(void);

/**
 * Message describing this thread's most recent failure, or NULL if no
 * call on this thread has failed yet. Valid until the next failing
 * call on the same thread.
 */
const char *hflc_last_error(void);

/**
 * Load a model file saved by the `hflc` binary and return an opaque
 * handle through `out`.
 *
 * On failure `*out` is left untouched. Missing or unreadable files
 * report `HFLC_STATUS_IO`; files that read but do not describe a valid
 * hierarchy report `HFLC_STATUS_INVALID_ARGUMENT`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid
 * pointer.
 */
enum HflcStatus hflc_model_load(const char *path, struct HflcModel **out);

/**
 * Release a handle returned by [`hflc_model_load`]. NULL is a no-op.
 *
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void hflc_model_free(struct HflcModel *model);

/**
 * Number of inputs the named controller expects, through `out`.
 *
 * # Safety
 * All pointers must be valid; `controller` must be NUL-terminated.
 */
enum HflcStatus hflc_model_input_count(const struct HflcModel *model,
                                       const char *controller,
                                       size_t *out);

/**
 * Number of outputs (independently trained models) of the named
 * controller, through `out`.
 *
 * # Safety
 * All pointers must be valid; `controller` must be NUL-terminated.
 */
enum HflcStatus hflc_model_output_count(const struct HflcModel *model,
                                        const char *controller,
                                        size_t *out);

/**
 * Evaluate one output of one controller at the given input vector and
 * write the result through `out`.
 *
 * `inputs` must hold exactly the controller's input count (see
 * [`hflc_model_input_count`]), in the controller's own input order.
 *
 * # Safety
 * All pointers must be valid; `inputs` must point to `n_inputs`
 * doubles.
 */
enum HflcStatus hflc_model_eval(const struct HflcModel *model,
                                const char *controller,
                                size_t output_index,
                                const double *inputs,
                                size_t n_inputs,
                                double *out);

/**
 * Resolve the cyclic controller chain for one centre-of-mass reference
 * point, starting from `warm_start`, and write the outcome through
 * `out`.
 *
 * Pass `max_iter = 0` and/or `tol <= 0` to use the library defaults
 * (10 sweeps, 1e-6).
 *
 * # Safety
 * All pointers must be valid.
 */
enum HflcStatus hflc_model_run_chain(const struct HflcModel *model,
                                     double com_x,
                                     double com_y,
                                     const struct HflcChainState *warm_start,
                                     size_t max_iter,
                                     double tol,
                                     struct HflcChainResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HFLC_H */
