#ifndef SYMPLECTIC_NLEVEL_H
#define SYMPLECTIC_NLEVEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which closed form produced a value.
 */
typedef enum NlClosedForm {
  /**
   * Total support ≤ 1.
   */
  NlClosedForm_Pairing = 1,
  /**
   * Total support < 2.
   */
  NlClosedForm_SingleShift = 2,
  /**
   * Total support < 3.
   */
  NlClosedForm_DoubleShift = 3,
} NlClosedForm;

typedef enum NlProfileKind {
  NlProfileKind_Triangle = 0,
  NlProfileKind_RaisedCosine = 1,
  NlProfileKind_PiecewisePolynomial = 2,
} NlProfileKind;

/**
 * Result codes shared by every entry point.
 */
typedef enum NlStatus {
  NlStatus_Ok = 0,
  NlStatus_NullPointer = 1,
  NlStatus_Domain = 2,
  NlStatus_Numerical = 3,
  NlStatus_Singularity = 4,
  NlStatus_Capacity = 5,
  NlStatus_Panic = 6,
  NlStatus_Io = 7,
} NlStatus;

/**
 * Opaque test-function handle.
 */
typedef struct NlTestFunction NlTestFunction;

typedef struct NlEstimate {
  double value;
  /**
   * Monte Carlo standard error, or the numerical error estimate.
   */
  double error;
} NlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a test function. `coefficients` (length `n_coefficients`) is read
 * only for the piecewise-polynomial profile and may be NULL otherwise.
 *
 * # Safety
 * `coefficients` must point to `n_coefficients` doubles when non-NULL;
 * `out` must be a valid pointer.
 */
enum NlStatus nl_testfn_new(enum NlProfileKind kind,
                            double sigma,
                            const double *coefficients,
                            uintptr_t n_coefficients,
                            struct NlTestFunction **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `f` must come from `nl_testfn_new` and not be freed twice.
 */
void nl_testfn_free(struct NlTestFunction *f);

/**
 * f(x) on the real line.
 *
 * # Safety
 * `f` and `out` must be valid pointers.
 */
enum NlStatus nl_testfn_eval(const struct NlTestFunction *f, double x, double *out);

/**
 * f̂(u).
 *
 * # Safety
 * `f` and `out` must be valid pointers.
 */
enum NlStatus nl_testfn_fhat(const struct NlTestFunction *f, double u, double *out);

/**
 * N → ∞ n-level density of the product of `n` test functions, using the
 * closed form that matches its total support (< 3).
 *
 * # Safety
 * `fns` must point to `n` valid handles; `out` must be valid; `form` may be NULL.
 */
enum NlStatus nl_closed_form(const struct NlTestFunction *const *fns,
                             uintptr_t n,
                             struct NlEstimate *out,
                             enum NlClosedForm *form);

/**
 * Monte Carlo estimate over `samples` Haar draws from USp(2N), N = `n_half`.
 * Deterministic for a given seed.
 *
 * # Safety
 * `fns` must point to `n` valid handles; `out` must be valid.
 */
enum NlStatus nl_mc_n_level(uintptr_t n_half,
                            const struct NlTestFunction *const *fns,
                            uintptr_t n,
                            uintptr_t samples,
                            uint64_t seed,
                            struct NlEstimate *out);

/**
 * Exact finite-N value by contour integration (n ≤ 2). `delta_scale` places
 * the contours at Re z = c·i/N; pass 0.5 for the default.
 *
 * # Safety
 * `fns` must point to `n` valid handles; `out` must be valid.
 */
enum NlStatus nl_contour_n_level(uintptr_t n_half,
                                 const struct NlTestFunction *const *fns,
                                 uintptr_t n,
                                 double delta_scale,
                                 struct NlEstimate *out);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *nl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMPLECTIC_NLEVEL_H */
