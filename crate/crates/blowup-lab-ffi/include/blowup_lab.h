/* C interface to the blowup-lab numerical laboratory. */

#pragma once

/* Generated with cbindgen:0.26.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function of this library.
typedef enum BlcStatus {
  // Success.
  BlcStatus_Ok = 0,
  // A pointer argument was null.
  BlcStatus_NullPointer = 1,
  // An argument was outside its documented domain.
  BlcStatus_InvalidArgument = 2,
  // A provided buffer length did not match the expected length.
  BlcStatus_BadLength = 3,
  // An internal solver failed to converge or a numerical check failed.
  BlcStatus_NumericsFailed = 4,
  // A panic was caught at the boundary; state may be inconsistent.
  BlcStatus_Panic = 5,
} BlcStatus;

// Opaque workspace: ground state, linearized pair, first-order profile and
// blow-up law for a fixed `(dim, sigma, e0, lambda0)`.
typedef struct BlcWorkspace BlcWorkspace;

// Coefficients of the blow-up rate fit
// `log lambda = exponent*log|t| + log_coeff*log log(1/|t|) + intercept`.
typedef struct BlcRateFit {
  double exponent;
  double log_coeff;
  double intercept;
  // RMS residual of the full model.
  double residual;
  // RMS residual with the log-correction term removed.
  double residual_power_only;
  // Decades of lambda-decrease covered by the data.
  double decades;
} BlcRateFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build a workspace for spatial dimension `dim` (1 or 2) and potential
// strength `sigma` in `(0, min(dim/4, 1))`. `e0` is the conserved energy used
// by the blow-up law; `lambda0 <= 0` selects the default anchor scale.
// On success `*out` owns the workspace; release it with `blc_workspace_free`.
enum BlcStatus blc_workspace_new(uint32_t dim,
                                 double sigma,
                                 double e0,
                                 double lambda0,
                                 struct BlcWorkspace **out);

// Release a workspace created by `blc_workspace_new`. Null is a no-op.
void blc_workspace_free(struct BlcWorkspace *ws);

// Profile coefficients `beta1`, `beta2`, `beta1_prime`. Null outputs are skipped.
enum BlcStatus blc_profile_betas(const struct BlcWorkspace *ws,
                                 double *beta1,
                                 double *beta2,
                                 double *beta1_prime);

// Phase of the approximate solution at scale `lambda` in (0, 1).
enum BlcStatus blc_profile_theta(const struct BlcWorkspace *ws, double lambda, double *out);

// Rescaled time `s` at which the law reaches scale `lambda`.
enum BlcStatus blc_law_s_of_lambda(const struct BlcWorkspace *ws, double lambda, double *out);

// Scale `lambda` of the law at rescaled time `s`.
enum BlcStatus blc_law_lambda_of_s(const struct BlcWorkspace *ws, double s, double *out);

// Modulation parameter `b` of the law at rescaled time `s`.
enum BlcStatus blc_law_b_of_s(const struct BlcWorkspace *ws, double s, double *out);

// Lab time `t < 0` (blow-up at `t = 0`) corresponding to rescaled time `s`.
enum BlcStatus blc_law_t_of_s(const struct BlcWorkspace *ws, double s, double *out);

// Rescaled time `s` corresponding to lab time `t < 0`.
enum BlcStatus blc_law_s_of_t(const struct BlcWorkspace *ws, double t, double *out);

// Number of radial grid nodes of the workspace's ground state.
uintptr_t blc_grid_len(const struct BlcWorkspace *ws);

// Copy the radial nodes and ground-state values into caller buffers of
// length `len`, which must equal `blc_grid_len`. Null buffers are skipped.
enum BlcStatus blc_ground_state_copy(const struct BlcWorkspace *ws,
                                     double *r,
                                     double *q,
                                     uintptr_t len);

// Fit the blow-up rate model to `n` samples `(t[i], lambda[i])` with
// `-1 < t[i] < 0` (blow-up at `t = 0`) and `lambda[i] > 0`. Requires at
// least 4 samples spanning one decade of lambda-decrease.
enum BlcStatus blc_fit_rate(const double *t,
                            const double *lambda,
                            uintptr_t n,
                            struct BlcRateFit *out);

// Copy the most recent error message on this thread into `buf` (NUL
// terminated, truncated to `len` bytes). A zero-length buffer is a no-op.
void blc_last_error_message(char *buf, uintptr_t len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus
