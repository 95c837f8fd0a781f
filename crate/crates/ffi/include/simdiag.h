#ifndef SIMDIAG_H
#define SIMDIAG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result class of every fallible call. Values match the CLI exit codes,
 * with `NullPointer` added for argument violations C cannot express.
 */
typedef enum {
  SD_STATUS_OK = 0,
  SD_STATUS_CHECK_FAILED = 1,
  SD_STATUS_INVALID_INPUT = 2,
  SD_STATUS_NUMERICAL_ERROR = 3,
  SD_STATUS_NULL_POINTER = 4,
} SdStatus;

/**
 * Opaque dense complex matrix.
 */
typedef struct SdMatrix SdMatrix;

/**
 * Opaque simultaneous-diagonalization result.
 */
typedef struct SdSimdiag SdSimdiag;

/**
 * Opaque shared-left-basis SVD result.
 */
typedef struct SdSvd SdSvd;

/**
 * Tolerance bundle mirroring the library's `ToleranceConfig`.
 */
typedef struct {
  double rtol;
  double atol;
  double cluster_tol;
  double cond_max;
} SdTolerance;

/**
 * Complex scalar crossing the boundary, `re + im*i`.
 */
typedef struct {
  double re;
  double im;
} SdComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failing call on this thread; empty before the
 * first failure. The pointer is invalidated by the next failing call on the
 * same thread.
 */
const char *sd_last_error_message(void);

/**
 * Library default tolerances.
 */
SdTolerance sd_tolerance_default(void);

/**
 * Builds a matrix from `rows * cols` row-major entries. Rejects empty
 * shapes and non-finite values.
 *
 * # Safety
 * `entries` must point to at least `rows * cols` readable values and `out`
 * must be a valid writable pointer. On success the caller owns the handle
 * written to `out` and must release it with `sd_matrix_free`.
 */
SdStatus sd_matrix_new(uintptr_t rows, uintptr_t cols, const SdComplex *entries, SdMatrix **out);

/**
 * Releases a matrix handle. Null is a no-op.
 *
 * # Safety
 * `m` must be null or a handle produced by this library that has not been
 * freed already.
 */
void sd_matrix_free(SdMatrix *m);

/**
 * Row count, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
uintptr_t sd_matrix_rows(const SdMatrix *m);

/**
 * Column count, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
uintptr_t sd_matrix_cols(const SdMatrix *m);

/**
 * Reads one entry.
 *
 * # Safety
 * `m` must be null or a live handle; `out` must be writable.
 */
SdStatus sd_matrix_get(const SdMatrix *m, uintptr_t row, uintptr_t col, SdComplex *out);

/**
 * Copies all entries in row-major order. `len` must equal `rows * cols`.
 *
 * # Safety
 * `m` must be null or a live handle; `out` must point to `len` writable
 * values.
 */
SdStatus sd_matrix_copy_entries(const SdMatrix *m, SdComplex *out, uintptr_t len);

/**
 * Parses the text matrix format (`rows cols` header, complex literals like
 * `1.5-2i`, `#` comments).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable. The
 * caller owns the handle on success.
 */
SdStatus sd_matrix_parse(const char *text, SdMatrix **out);

/**
 * Renders a matrix to the text format as a newly allocated string, or null
 * for a null handle. Release with `sd_string_free`.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
char *sd_matrix_render(const SdMatrix *m);

/**
 * Releases a string returned by `sd_matrix_render`. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string produced by this library that has not been
 * freed already.
 */
void sd_string_free(char *s);

/**
 * Commutator check: `Ok` when `||ab - ba||` passes at `rtol`, otherwise
 * `CheckFailed`. The relative residual is written to `out_residual` when
 * that pointer is non-null. A null `tol` selects the defaults.
 *
 * # Safety
 * `a` and `b` must be live handles; `out_residual` must be null or
 * writable.
 */
SdStatus sd_check_commute(const SdMatrix *a,
                          const SdMatrix *b,
                          const SdTolerance *tol,
                          double *out_residual);

/**
 * Star-commutator check, same contract as `sd_check_commute` for
 * `a^H b - b a^H`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out_residual` must be null or
 * writable.
 */
SdStatus sd_check_star_commute(const SdMatrix *a,
                               const SdMatrix *b,
                               const SdTolerance *tol,
                               double *out_residual);

/**
 * Eigenvalues of a square matrix in canonical order (descending real part,
 * then descending imaginary part). `len` must equal the dimension.
 *
 * # Safety
 * `a` must be a live handle; `out` must point to `len` writable values.
 */
SdStatus sd_eigenvalues(const SdMatrix *a, SdComplex *out, uintptr_t len);

/**
 * Simultaneously diagonalizes a commuting pair. A null `tol` selects the
 * defaults. The caller owns the result handle.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable. Release the
 * result with `sd_simdiag_free`.
 */
SdStatus sd_simdiag(const SdMatrix *a, const SdMatrix *b, const SdTolerance *tol, SdSimdiag **out);

/**
 * # Safety
 * `res` must be null or an unfreed handle from `sd_simdiag`.
 */
void sd_simdiag_free(SdSimdiag *res);

/**
 * Problem dimension, or 0 for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
uintptr_t sd_simdiag_dim(const SdSimdiag *res);

/**
 * Copies the common eigenvector matrix into a fresh handle owned by the
 * caller.
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
SdStatus sd_simdiag_basis(const SdSimdiag *res, SdMatrix **out);

/**
 * Eigenvalues of `a` per output column. `len` must equal the dimension.
 *
 * # Safety
 * `res` must be a live handle; `out` must point to `len` writable values.
 */
SdStatus sd_simdiag_diag_a(const SdSimdiag *res, SdComplex *out, uintptr_t len);

/**
 * Eigenvalues of `b` per output column.
 *
 * # Safety
 * `res` must be a live handle; `out` must point to `len` writable values.
 */
SdStatus sd_simdiag_diag_b(const SdSimdiag *res, SdComplex *out, uintptr_t len);

/**
 * Relative diagonalization residual for `a`, or NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double sd_simdiag_residual_a(const SdSimdiag *res);

/**
 * Relative diagonalization residual for `b`, or NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double sd_simdiag_residual_b(const SdSimdiag *res);

/**
 * Shared-left-basis SVD of a commuting, star-commuting pair. A null `tol`
 * selects the defaults. The caller owns the result handle.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable. Release the
 * result with `sd_svd_free`.
 */
SdStatus sd_svd_pair(const SdMatrix *a, const SdMatrix *b, const SdTolerance *tol, SdSvd **out);

/**
 * # Safety
 * `res` must be null or an unfreed handle from `sd_svd_pair`.
 */
void sd_svd_free(SdSvd *res);

/**
 * Problem dimension, or 0 for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
uintptr_t sd_svd_dim(const SdSvd *res);

/**
 * Copies the shared left factor `u` into a fresh handle owned by the
 * caller.
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
SdStatus sd_svd_u(const SdSvd *res, SdMatrix **out);

/**
 * Copies the right factor of `a`.
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
SdStatus sd_svd_v_a(const SdSvd *res, SdMatrix **out);

/**
 * Copies the right factor of `b`.
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
SdStatus sd_svd_v_b(const SdSvd *res, SdMatrix **out);

/**
 * Singular values of `a` per column of `u`. `len` must equal the
 * dimension.
 *
 * # Safety
 * `res` must be a live handle; `out` must point to `len` writable values.
 */
SdStatus sd_svd_sigma_a(const SdSvd *res, double *out, uintptr_t len);

/**
 * Singular values of `b` per column of `u`.
 *
 * # Safety
 * `res` must be a live handle; `out` must point to `len` writable values.
 */
SdStatus sd_svd_sigma_b(const SdSvd *res, double *out, uintptr_t len);

/**
 * Relative reconstruction residual for `a`, or NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double sd_svd_residual_a(const SdSvd *res);

/**
 * Relative reconstruction residual for `b`, or NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double sd_svd_residual_b(const SdSvd *res);

/**
 * Conjugates `a` by the permutation sending index `i` to `image[i]`,
 * producing `p a p^T` in a fresh handle owned by the caller. `len` must
 * equal the dimension of `a`.
 *
 * # Safety
 * `a` must be a live handle; `image` must point to `len` readable values;
 * `out` must be writable.
 */
SdStatus sd_conjugate_by_permutation(const SdMatrix *a,
                                     const uintptr_t *image,
                                     uintptr_t len,
                                     SdMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMDIAG_H */
