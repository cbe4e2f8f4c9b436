#ifndef QSL_FFI_H
#define QSL_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum QslStatus {
  QSL_STATUS_OK = 0,
  QSL_STATUS_NULL_POINTER = 1,
  QSL_STATUS_INVALID_PARAMETER = 2,
  QSL_STATUS_OUT_OF_RANGE = 3,
  QSL_STATUS_NOT_CONVERGED = 4,
  QSL_STATUS_NUMERICAL = 5,
  QSL_STATUS_PANIC = 6,
} QslStatus;

/**
 * Closed-form bound prefactor.
 */
typedef enum QslVariant {
  QSL_VARIANT_PAPER = 0,
  QSL_VARIANT_ML = 1,
} QslVariant;

/**
 * Opaque dephasing channel.
 */
typedef struct QslChannel QslChannel;

/**
 * Engine output for one driving window `[tau, tau + tau_d]`.
 */
typedef struct QslBound {
  double tau;
  double tau_d;
  /**
   * Relative purity between the window end points.
   */
  double f;
  double purity_tau;
  double ml_denom;
  double mt_denom;
  double tau_ml;
  double tau_mt;
  double tau_qsl;
} QslBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qsl_version(void);

/**
 * Message for the most recent failure on this thread; empty if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *qsl_last_error_message(void);

/**
 * Ohmic phase-damping channel with exponent `s` and cutoff `omega_c`.
 *
 * With `t_max > 0` the decoherence function is tabulated on `[0, t_max]` and
 * later evaluations beyond `t_max` fail with `QSL_STATUS_OUT_OF_RANGE`. With
 * `t_max == 0` every evaluation runs the quadrature directly.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QslStatus qsl_channel_phase_damping(double s,
                                         double omega_c,
                                         double t_max,
                                         struct QslChannel **out);

/**
 * Random-telegraph-noise channel with coupling `alpha` and switching time
 * `delta`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QslStatus qsl_channel_rtn(double alpha, double delta, struct QslChannel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `ch` must be null or a handle from a `qsl_channel_*` constructor that has
 * not been freed.
 */
void qsl_channel_free(struct QslChannel *ch);

/**
 * Coherence factor `q(t)` and its rate. Either output may be null.
 *
 * # Safety
 * `ch` must be a live handle; non-null outputs must be writable.
 */
enum QslStatus qsl_channel_coherence(const struct QslChannel *ch,
                                     double t,
                                     double *out_q,
                                     double *out_rate);

/**
 * Speed-limit bound for the filtered trajectory with filter strength `k`
 * over `[tau, tau + tau_d]`, using the default quadrature settings.
 *
 * # Safety
 * `ch` must be a live handle and `out` writable.
 */
enum QslStatus qsl_bound(const struct QslChannel *ch,
                         double k,
                         double tau,
                         double tau_d,
                         struct QslBound *out);

/**
 * Closed-form bound for the filtered trajectory with the given prefactor.
 *
 * # Safety
 * `ch` must be a live handle and `out` writable.
 */
enum QslStatus qsl_bound_closed_form(const struct QslChannel *ch,
                                     double k,
                                     double tau,
                                     double tau_d,
                                     enum QslVariant variant,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSL_FFI_H */
