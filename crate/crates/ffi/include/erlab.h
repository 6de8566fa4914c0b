#ifndef ERLAB_H
#define ERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum ErlabStatus {
  ERLAB_STATUS_OK = 0,
  ERLAB_STATUS_NULL_POINTER = 1,
  ERLAB_STATUS_INVALID_ARGUMENT = 2,
  ERLAB_STATUS_DIMENSION_MISMATCH = 3,
  ERLAB_STATUS_SINGULAR = 4,
  ERLAB_STATUS_SIZE_LIMIT = 5,
  ERLAB_STATUS_UNSUPPORTED = 6,
  ERLAB_STATUS_PANIC = 7,
} ErlabStatus;

/**
 * Gaussian linear model.
 */
typedef struct ErlabLinearModel ErlabLinearModel;

/**
 * Payoff matrix of a finite game.
 */
typedef struct ErlabPayoff ErlabPayoff;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *erlab_version(void);

/**
 * Message describing the last failure on this thread; empty after success.
 * Valid until the next call into the library on this thread.
 */
const char *erlab_last_error_message(void);

/**
 * Model with `φ ≡ 1` (d = 1).
 *
 * # Safety
 * `out_model` must be a valid pointer.
 */
enum ErlabStatus erlab_linear_model_constant_feature(double sigma_w,
                                                     double sigma_e,
                                                     double mu,
                                                     double c,
                                                     struct ErlabLinearModel **out_model);

/**
 * Model with identity features and inputs uniform on `[-1/√d, 1/√d]^d`;
 * `mu` has length `d`.
 *
 * # Safety
 * `mu` must point to `d` doubles and `out_model` must be valid.
 */
enum ErlabStatus erlab_linear_model_identity(uintptr_t d,
                                             double sigma_w,
                                             double sigma_e,
                                             const double *mu,
                                             double c,
                                             struct ErlabLinearModel **out_model);

/**
 * Model from its JSON description (same schema as the `linear` config key).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_model` must be valid.
 */
enum ErlabStatus erlab_linear_model_from_json(const char *json,
                                              struct ErlabLinearModel **out_model);

/**
 * # Safety
 * `model` must come from an `erlab_linear_model_*` constructor or be null.
 */
void erlab_linear_model_free(struct ErlabLinearModel *model);

/**
 * Monte Carlo `I(W; Z^n)` in nats.
 *
 * # Safety
 * All pointers must be valid.
 */
enum ErlabStatus erlab_mi_w_zn(const struct ErlabLinearModel *model,
                               uintptr_t n,
                               uintptr_t reps,
                               uint64_t seed,
                               uint64_t stream,
                               double *out_mean,
                               double *out_std_error);

/**
 * Monte Carlo `I(W; Y | X, Z^n)` in nats.
 *
 * # Safety
 * All pointers must be valid.
 */
enum ErlabStatus erlab_cmi(const struct ErlabLinearModel *model,
                           uintptr_t n,
                           uintptr_t reps,
                           uint64_t seed,
                           uint64_t stream,
                           double *out_mean,
                           double *out_std_error);

/**
 * Posterior-sampling bound `φ*⁻¹((I(W;Z^n) + r)/n)` for the model's
 * sub-exponential envelope and prior-mean ball.
 *
 * # Safety
 * All pointers must be valid.
 */
enum ErlabStatus erlab_posterior_sampling_mi_bound(const struct ErlabLinearModel *model,
                                                   double mi_wzn,
                                                   uintptr_t n,
                                                   double *out_value);

/**
 * Generalised inverse of the Legendre dual of the sub-exponential envelope.
 *
 * # Safety
 * `out_value` must be valid.
 */
enum ErlabStatus erlab_legendre_dual_inverse(double sigma_w,
                                             double sigma_e,
                                             double x,
                                             double *out_value);

/**
 * `(1 + d_vc ln n)/n`.
 *
 * # Safety
 * `out_value` must be valid.
 */
enum ErlabStatus erlab_sauer_bound(uintptr_t dvc, uintptr_t n, double *out_value);

/**
 * Payoff matrix from `rows × cols` values in row-major order (row player
 * minimises).
 *
 * # Safety
 * `values` must point to `rows * cols` doubles and `out_payoff` must be valid.
 */
enum ErlabStatus erlab_payoff_new(uintptr_t rows,
                                  uintptr_t cols,
                                  const double *values,
                                  struct ErlabPayoff **out_payoff);

/**
 * # Safety
 * `payoff` must come from `erlab_payoff_new` or be null.
 */
void erlab_payoff_free(struct ErlabPayoff *payoff);

/**
 * Exact game solution. `out_row` holds `rows` doubles, `out_col` holds
 * `cols` doubles.
 *
 * # Safety
 * All pointers must be valid and large enough.
 */
enum ErlabStatus erlab_solve_lp(const struct ErlabPayoff *payoff,
                                double *out_row,
                                double *out_col,
                                double *out_value);

/**
 * Fictitious play; `out_gap` receives the certified duality gap.
 *
 * # Safety
 * All pointers must be valid and large enough.
 */
enum ErlabStatus erlab_solve_fictitious_play(const struct ErlabPayoff *payoff,
                                             uintptr_t max_iters,
                                             double tol,
                                             double *out_row,
                                             double *out_col,
                                             double *out_value,
                                             double *out_gap);

/**
 * Capacity in nats of the channel with row-stochastic `inputs × outputs`
 * matrix (row-major); `out_prior` receives `inputs` doubles.
 *
 * # Safety
 * All pointers must be valid and large enough.
 */
enum ErlabStatus erlab_blahut_arimoto(uintptr_t inputs,
                                      uintptr_t outputs,
                                      const double *matrix,
                                      double tol,
                                      double *out_capacity,
                                      double *out_prior);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERLAB_H */
