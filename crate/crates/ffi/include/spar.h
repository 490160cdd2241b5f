#ifndef SPAR_H
#define SPAR_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  SPAR_STATUS_OK = 0,
  SPAR_STATUS_NULL_POINTER = 1,
  SPAR_STATUS_INVALID_ARGUMENT = 2,
  SPAR_STATUS_NON_STATIONARY = 3,
  SPAR_STATUS_NOT_POSITIVE_DEFINITE = 4,
  SPAR_STATUS_SINGULAR = 5,
  SPAR_STATUS_UNSUPPORTED = 6,
  SPAR_STATUS_MISSING_DATA = 7,
  SPAR_STATUS_PANIC = 8,
  SPAR_STATUS_INTERNAL = 9,
} SparStatus;

typedef enum {
  SPAR_COV_METHOD_CLOSED_FORM = 0,
  SPAR_COV_METHOD_APPELL_F4 = 1,
  SPAR_COV_METHOD_BINOMIAL_REP = 2,
  SPAR_COV_METHOD_SERIES_ORACLE = 3,
} SparCovMethod;

typedef enum {
  SPAR_SIM_METHOD_BOUNDARY_CHOLESKY = 0,
  SPAR_SIM_METHOD_FULL_CHOLESKY = 1,
  SPAR_SIM_METHOD_BOUNDARY_SERIES = 2,
  /**
   * Uses the `margin` argument of [`spar_field_simulate`].
   */
  SPAR_SIM_METHOD_TRUNCATED_SERIES = 3,
} SparSimMethod;

typedef enum {
  SPAR_DIST_GAUSSIAN = 0,
  SPAR_DIST_RADEMACHER = 1,
  SPAR_DIST_UNIFORM = 2,
} SparDist;

typedef struct SparDesign SparDesign;

typedef struct SparField SparField;

typedef struct SparKernel SparKernel;

/**
 * Limit law of a design; `covariance` is row-major.
 */
typedef struct {
  /**
   * 0 interior, 1 boundary.
   */
  uint8_t boundary_case;
  uint8_t singular;
  uint8_t normalized_only;
  double covariance[4];
  /**
   * NaN in the interior case.
   */
  double theta;
  /**
   * NaN in the interior case; may be infinite.
   */
  double omega;
} SparLimit;

/**
 * Least-squares fit; matrices are row-major.
 */
typedef struct {
  double alpha_hat;
  double beta_hat;
  double b[4];
  double c[2];
  double det_b;
  /**
   * Score vector; only meaningful when `has_score` is nonzero.
   */
  double a[2];
  uint8_t has_score;
} SparEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid until
 * the next failing call on the same thread.
 */
const char *spar_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *spar_version(void);

/**
 * Creates a covariance kernel for `(alpha, beta)`. `tol` bounds the series
 * truncation error of the series-based methods.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
SparStatus spar_kernel_new(double alpha,
                           double beta,
                           SparCovMethod method,
                           double tol,
                           SparKernel **out);

/**
 * Writes `R(k, l)` to `out`.
 *
 * # Safety
 * `kernel` must come from [`spar_kernel_new`] and not be freed; `out` must be writable.
 */
SparStatus spar_kernel_cov(const SparKernel *kernel, int64_t k, int64_t l, double *out);

/**
 * # Safety
 * `kernel` must be null or a handle from [`spar_kernel_new`] not yet freed.
 */
void spar_kernel_free(SparKernel *kernel);

/**
 * Creates a nearly-unstable design with constant `gamma`, `delta` around the
 * boundary point `(alpha, beta)`, `|alpha| + |beta| = 1`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
SparStatus spar_design_new(double alpha, double beta, double gamma, double delta, SparDesign **out);

/**
 * Writes the model coefficients at index `m`.
 *
 * # Safety
 * `design` must be a live handle; `alpha_m`, `beta_m` must be writable.
 */
SparStatus spar_design_params(const SparDesign *design,
                              uint64_t m,
                              double *alpha_m,
                              double *beta_m);

/**
 * Writes the limit law, with `omega` probed at `m_probe`.
 *
 * # Safety
 * `design` must be a live handle; `out` must be writable.
 */
SparStatus spar_design_limit(const SparDesign *design, uint64_t m_probe, SparLimit *out);

/**
 * Writes the convergence rate at model index `m` and window sum `s`.
 *
 * # Safety
 * `design` must be a live handle; `out` must be writable.
 */
SparStatus spar_design_rate(const SparDesign *design, uint64_t m, uint64_t s, double *out);

/**
 * # Safety
 * `design` must be null or a live handle.
 */
void spar_design_free(SparDesign *design);

/**
 * Draws a field on the window `T(k, l)` from stream `rep` of `seed`. `margin`
 * is read only by [`SparSimMethod::TruncatedSeries`].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
SparStatus spar_field_simulate(double alpha,
                               double beta,
                               int64_t k,
                               int64_t l,
                               SparSimMethod method,
                               uint32_t margin,
                               SparDist dist,
                               uint64_t seed,
                               uint64_t rep,
                               SparField **out);

/**
 * Number of hull values in the field.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t spar_field_len(const SparField *field);

/**
 * Value at lattice point `(i, j)` of the hull.
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
SparStatus spar_field_value(const SparField *field, int64_t i, int64_t j, double *out);

/**
 * Copies the hull values, anti-diagonal by anti-diagonal, into `buf`
 * (`len` must be at least [`spar_field_len`]).
 *
 * # Safety
 * `field` must be a live handle and `buf` writable for `len` doubles.
 */
SparStatus spar_field_values(const SparField *field, double *buf, size_t len);

/**
 * Least-squares fit over the field's own window.
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
SparStatus spar_field_estimate(const SparField *field, SparEstimate *out);

/**
 * # Safety
 * `field` must be null or a live handle.
 */
void spar_field_free(SparField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPAR_H */
