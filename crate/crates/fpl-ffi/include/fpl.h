/* C interface to the spectral Fokker-Planck-Landau solver. */

#ifndef FPL_H
#define FPL_H

/* Generated by cbindgen from the fpl-ffi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call.
 */
typedef enum {
  /**
   * The call succeeded.
   */
  FPL_STATUS_OK = 0,
  /**
   * A numerical failure: non-finite right-hand side or integrator blowup.
   */
  FPL_STATUS_NUMERICAL = 1,
  /**
   * Invalid arguments or configuration (bad γ, degrees, scenario id, ...).
   */
  FPL_STATUS_USAGE = 2,
  /**
   * An I/O failure or a malformed/mismatched coefficient cache.
   */
  FPL_STATUS_IO = 3,
  /**
   * A required pointer argument was null.
   */
  FPL_STATUS_NULL_ARGUMENT = 4,
  /**
   * An internal panic was caught at the boundary; state may be stale but
   * memory is intact.
   */
  FPL_STATUS_PANIC = 5,
} FplStatus;

/**
 * Opaque handle to a spectral state (Hermite coefficients over I_M).
 */
typedef struct FplState FplState;

/**
 * Opaque handle to a precomputed collision tensor.
 */
typedef struct FplTensor FplTensor;

/**
 * Macroscopic moments of a state.  Entries whose defining coefficients lie
 * beyond the state's truncation are reported as NaN (velocity needs M ≥ 1,
 * temperature and stress M ≥ 2, heat flux M ≥ 3).
 */
typedef struct {
  /**
   * Density ρ.
   */
  double rho;
  /**
   * Bulk velocity u.
   */
  double u[3];
  /**
   * Temperature θ.
   */
  double theta;
  /**
   * Stress tensor σ (symmetric, trace-free).
   */
  double sigma[3][3];
  /**
   * Heat flux q.
   */
  double q[3];
} FplMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string; never null, never
 * freed by the caller.
 */
const char *fpl_version(void);

/**
 * Message describing the most recent failure on the calling thread, as a
 * NUL-terminated string.  The pointer stays valid until the next failing
 * `fpl_*` call on the same thread; do not free it.  Returns an empty string
 * if no failure has occurred yet.
 */
const char *fpl_last_error_message(void);

/**
 * Builds the collision tensor for kernel exponent `gamma` (> -5), strength
 * `lambda` (> 0), and truncation degree `m0` (≥ 2), writing the new handle
 * to `*out`.  This is the expensive entry point (seconds at m0 = 9).
 *
 * # Safety
 *
 * `out` must be a valid pointer to writable storage for one pointer.  On
 * `FPL_STATUS_OK` the caller owns the handle and must release it with
 * [`fpl_tensor_free`]; on failure `*out` is untouched.
 */
FplStatus fpl_tensor_build(double gamma, double lambda, uint32_t m0, FplTensor **out);

/**
 * Loads a coefficient cache previously written by [`fpl_tensor_save`] or by
 * `fpl precompute`, writing the new handle to `*out`.  The header is
 * validated (magic, version, checksum) but no particular γ/Λ/M0 is
 * demanded; query the handle afterwards if the caller expects specific
 * parameters.
 *
 * # Safety
 *
 * `path` must be a valid NUL-terminated string and `out` a valid pointer to
 * writable storage for one pointer, both for the duration of the call.  On
 * `FPL_STATUS_OK` the caller owns the handle and must release it with
 * [`fpl_tensor_free`].
 */
FplStatus fpl_tensor_load(const char *path, FplTensor **out);

/**
 * Writes `tensor` to `path` in the deterministic cache format.
 *
 * # Safety
 *
 * `tensor` must be a live handle from this library and `path` a valid
 * NUL-terminated string, both for the duration of the call.
 */
FplStatus fpl_tensor_save(const FplTensor *tensor, const char *path);

/**
 * Releases a tensor handle.  Passing null is a no-op.
 *
 * # Safety
 *
 * `tensor` must be null or a handle obtained from this library that has not
 * already been freed; it must not be used afterwards.
 */
void fpl_tensor_free(FplTensor *tensor);

/**
 * Kernel exponent γ of the tensor, or NaN if `tensor` is null.
 *
 * # Safety
 *
 * `tensor` must be null or a live handle from this library.
 */
double fpl_tensor_gamma(const FplTensor *tensor);

/**
 * Kernel strength Λ of the tensor, or NaN if `tensor` is null.
 *
 * # Safety
 *
 * `tensor` must be null or a live handle from this library.
 */
double fpl_tensor_lambda(const FplTensor *tensor);

/**
 * Truncation degree M0 of the tensor, or 0 if `tensor` is null.
 *
 * # Safety
 *
 * `tensor` must be null or a live handle from this library.
 */
uint32_t fpl_tensor_m0(const FplTensor *tensor);

/**
 * Number of stored nonzero entries, or 0 if `tensor` is null.
 *
 * # Safety
 *
 * `tensor` must be null or a live handle from this library.
 */
uint64_t fpl_tensor_entry_count(const FplTensor *tensor);

/**
 * Creates the global Maxwellian state truncated at degree `m` (≥ 2),
 * writing the new handle to `*out`.
 *
 * # Safety
 *
 * `out` must be a valid pointer to writable storage for one pointer.  On
 * `FPL_STATUS_OK` the caller owns the handle and must release it with
 * [`fpl_state_free`].
 */
FplStatus fpl_state_maxwellian(uint32_t m, FplState **out);

/**
 * Projects a named benchmark initial condition ("bkw", "bigaussian", or
 * "rosenbluth") onto the basis truncated at degree `m`, writing the new
 * handle to `*out`.
 *
 * # Safety
 *
 * `scenario` must be a valid NUL-terminated string and `out` a valid
 * pointer to writable storage for one pointer.  On `FPL_STATUS_OK` the
 * caller owns the handle and must release it with [`fpl_state_free`].
 */
FplStatus fpl_state_from_scenario(const char *scenario, uint32_t m, FplState **out);

/**
 * Releases a state handle.  Passing null is a no-op.
 *
 * # Safety
 *
 * `state` must be null or a handle obtained from this library that has not
 * already been freed; it must not be used afterwards.
 */
void fpl_state_free(FplState *state);

/**
 * Truncation degree M of the state, or 0 if `state` is null.
 *
 * # Safety
 *
 * `state` must be null or a live handle from this library.
 */
uint32_t fpl_state_degree(const FplState *state);

/**
 * Simulation time carried by the state, or NaN if `state` is null.
 *
 * # Safety
 *
 * `state` must be null or a live handle from this library.
 */
double fpl_state_time(const FplState *state);

/**
 * Reads the coefficient f_α at the multi-index α = (a1, a2, a3) into
 * `*value`.  Fails with a usage status if |α| exceeds the truncation.
 *
 * # Safety
 *
 * `state` must be a live handle from this library and `value` a valid
 * pointer to writable storage for one double.
 */
FplStatus fpl_state_coeff(const FplState *state,
                          uint32_t a1,
                          uint32_t a2,
                          uint32_t a3,
                          double *value);

/**
 * Overwrites the coefficient f_α at α = (a1, a2, a3).  Fails with a usage
 * status if |α| exceeds the truncation or `value` is not finite.
 *
 * # Safety
 *
 * `state` must be a live handle from this library.
 */
FplStatus fpl_state_set_coeff(FplState *state, uint32_t a1, uint32_t a2, uint32_t a3, double value);

/**
 * Computes the macroscopic moments of `state` into `*out`; entries beyond
 * the truncation come back as NaN (see [`FplMoments`]).
 *
 * # Safety
 *
 * `state` must be a live handle from this library and `out` a valid pointer
 * to writable storage for one `FplMoments`.
 */
FplStatus fpl_moments(const FplState *state, FplMoments *out);

/**
 * Advances `state` in place by `t_end` time units from its current time
 * with fixed RK4 steps of size `dt` (`round(t_end/dt)` steps).  The
 * collision model follows the degrees:
 * the full quadratic operator when the state's M equals the tensor's M0,
 * the hybrid quadratic/linear split when M exceeds M0; M below M0 is a
 * usage error.  On a numerical failure the state keeps its pre-call value.
 *
 * # Safety
 *
 * `tensor` and `state` must be live handles from this library; `state` must
 * not be aliased for the duration of the call.
 */
FplStatus fpl_evolve(const FplTensor *tensor, FplState *state, double dt, double t_end);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPL_H */
