//! C ABI over the simdiag pipelines: opaque matrix handles, status codes
//! matching the CLI exit classes, and a thread-local last-error message.
//!
//! Every fallible call returns an [`SdStatus`]. On any status other than
//! `Ok`, `sd_last_error_message` describes the failure; the pointer stays
//! valid on the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::slice;

use simdiag::error::Error;
use simdiag::simdiag as pipeline;
use simdiag::{eigen, io, permutation, svd, ComplexScalar, Matrix, ToleranceConfig};

/// Result class of every fallible call. Values match the CLI exit codes,
/// with `NullPointer` added for argument violations C cannot express.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    CheckFailed = 1,
    InvalidInput = 2,
    NumericalError = 3,
    NullPointer = 4,
}

/// Complex scalar crossing the boundary, `re + im*i`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdComplex {
    pub re: f64,
    pub im: f64,
}

/// Tolerance bundle mirroring the library's `ToleranceConfig`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdTolerance {
    pub rtol: f64,
    pub atol: f64,
    pub cluster_tol: f64,
    pub cond_max: f64,
}

/// Opaque dense complex matrix.
pub struct SdMatrix(Matrix);

/// Opaque simultaneous-diagonalization result.
pub struct SdSimdiag(pipeline::SimDiagResult);

/// Opaque shared-left-basis SVD result.
pub struct SdSvd(svd::CommutingSvdResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(err: &Error) -> SdStatus {
    set_error(&err.to_string());
    match err {
        Error::NotCommuting { .. } | Error::NotStarCommuting { .. } => SdStatus::CheckFailed,
        Error::Parse { .. }
        | Error::NonFinite { .. }
        | Error::Io { .. }
        | Error::Dimension(_)
        | Error::InvalidPermutation(_)
        | Error::InvalidSpec(_)
        | Error::MalformedReport(_)
        | Error::InvalidTolerance(_) => SdStatus::InvalidInput,
        _ => SdStatus::NumericalError,
    }
}

fn null_arg(name: &str) -> SdStatus {
    set_error(&format!("{name} must not be null"));
    SdStatus::NullPointer
}

fn length_mismatch(name: &str, expected: usize, got: usize) -> SdStatus {
    set_error(&format!(
        "{name} needs room for {expected} values, got {got}"
    ));
    SdStatus::InvalidInput
}

/// Resolves an optional tolerance pointer, falling back to the defaults.
unsafe fn resolve_tol(tol: *const SdTolerance) -> Result<ToleranceConfig, SdStatus> {
    let config = if tol.is_null() {
        ToleranceConfig::default()
    } else {
        let t = unsafe { *tol };
        ToleranceConfig {
            rtol: t.rtol,
            atol: t.atol,
            cluster_tol: t.cluster_tol,
            cond_max: t.cond_max,
        }
    };
    config.validate().map_err(|e| fail(&e))?;
    Ok(config)
}

fn export_matrix(m: Matrix, out: *mut *mut SdMatrix) -> SdStatus {
    unsafe { *out = Box::into_raw(Box::new(SdMatrix(m))) };
    SdStatus::Ok
}

fn to_scalar(v: SdComplex) -> ComplexScalar {
    ComplexScalar::new(v.re, v.im)
}

fn from_scalar(v: ComplexScalar) -> SdComplex {
    SdComplex { re: v.re, im: v.im }
}

/// Message for the most recent failing call on this thread; empty before the
/// first failure. The pointer is invalidated by the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library default tolerances.
#[no_mangle]
pub extern "C" fn sd_tolerance_default() -> SdTolerance {
    let t = ToleranceConfig::default();
    SdTolerance {
        rtol: t.rtol,
        atol: t.atol,
        cluster_tol: t.cluster_tol,
        cond_max: t.cond_max,
    }
}

/// Builds a matrix from `rows * cols` row-major entries. Rejects empty
/// shapes and non-finite values.
///
/// # Safety
/// `entries` must point to at least `rows * cols` readable values and `out`
/// must be a valid writable pointer. On success the caller owns the handle
/// written to `out` and must release it with `sd_matrix_free`.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_new(
    rows: usize,
    cols: usize,
    entries: *const SdComplex,
    out: *mut *mut SdMatrix,
) -> SdStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if entries.is_null() {
        return null_arg("entries");
    }
    let Some(len) = rows.checked_mul(cols) else {
        set_error("rows * cols overflows");
        return SdStatus::InvalidInput;
    };
    let raw = unsafe { slice::from_raw_parts(entries, len) };
    let data: Vec<ComplexScalar> = raw.iter().copied().map(to_scalar).collect();
    match Matrix::new(rows, cols, data) {
        Ok(m) => export_matrix(m, out),
        Err(e) => fail(&e),
    }
}

/// Releases a matrix handle. Null is a no-op.
///
/// # Safety
/// `m` must be null or a handle produced by this library that has not been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_free(m: *mut SdMatrix) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Row count, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_rows(m: *const SdMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.0.rows())
}

/// Column count, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_cols(m: *const SdMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.0.cols())
}

/// Reads one entry.
///
/// # Safety
/// `m` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_get(
    m: *const SdMatrix,
    row: usize,
    col: usize,
    out: *mut SdComplex,
) -> SdStatus {
    let Some(m) = (unsafe { m.as_ref() }) else {
        return null_arg("m");
    };
    if out.is_null() {
        return null_arg("out");
    }
    if row >= m.0.rows() || col >= m.0.cols() {
        set_error(&format!(
            "index ({row}, {col}) out of bounds for {}x{}",
            m.0.rows(),
            m.0.cols()
        ));
        return SdStatus::InvalidInput;
    }
    unsafe { *out = from_scalar(m.0[(row, col)]) };
    SdStatus::Ok
}

/// Copies all entries in row-major order. `len` must equal `rows * cols`.
///
/// # Safety
/// `m` must be null or a live handle; `out` must point to `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_copy_entries(
    m: *const SdMatrix,
    out: *mut SdComplex,
    len: usize,
) -> SdStatus {
    let Some(m) = (unsafe { m.as_ref() }) else {
        return null_arg("m");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let expected = m.0.rows() * m.0.cols();
    if len != expected {
        return length_mismatch("out", expected, len);
    }
    let target = unsafe { slice::from_raw_parts_mut(out, len) };
    for (dst, src) in target.iter_mut().zip(m.0.entries()) {
        *dst = from_scalar(*src);
    }
    SdStatus::Ok
}

/// Parses the text matrix format (`rows cols` header, complex literals like
/// `1.5-2i`, `#` comments).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable. The
/// caller owns the handle on success.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_parse(text: *const c_char, out: *mut *mut SdMatrix) -> SdStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if text.is_null() {
        return null_arg("text");
    }
    let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
        set_error("text is not valid UTF-8");
        return SdStatus::InvalidInput;
    };
    match io::parse_matrix(text) {
        Ok(m) => export_matrix(m, out),
        Err(e) => fail(&e),
    }
}

/// Renders a matrix to the text format as a newly allocated string, or null
/// for a null handle. Release with `sd_string_free`.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_matrix_render(m: *const SdMatrix) -> *mut c_char {
    let Some(m) = (unsafe { m.as_ref() }) else {
        return ptr::null_mut();
    };
    CString::new(io::render_matrix(&m.0)).map_or(ptr::null_mut(), CString::into_raw)
}

/// Releases a string returned by `sd_matrix_render`. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string produced by this library that has not been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn sd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn pair_check(
    a: *const SdMatrix,
    b: *const SdMatrix,
    tol: *const SdTolerance,
    out_residual: *mut f64,
    check: impl Fn(&Matrix, &Matrix, &ToleranceConfig) -> simdiag::Result<(bool, f64)>,
    reject: impl Fn(f64) -> Error,
) -> SdStatus {
    let Some(a) = (unsafe { a.as_ref() }) else {
        return null_arg("a");
    };
    let Some(b) = (unsafe { b.as_ref() }) else {
        return null_arg("b");
    };
    let config = match unsafe { resolve_tol(tol) } {
        Ok(c) => c,
        Err(status) => return status,
    };
    match check(&a.0, &b.0, &config) {
        Ok((pass, residual)) => {
            if !out_residual.is_null() {
                unsafe { *out_residual = residual };
            }
            if pass {
                SdStatus::Ok
            } else {
                fail(&reject(residual))
            }
        }
        Err(e) => fail(&e),
    }
}

/// Commutator check: `Ok` when `||ab - ba||` passes at `rtol`, otherwise
/// `CheckFailed`. The relative residual is written to `out_residual` when
/// that pointer is non-null. A null `tol` selects the defaults.
///
/// # Safety
/// `a` and `b` must be live handles; `out_residual` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sd_check_commute(
    a: *const SdMatrix,
    b: *const SdMatrix,
    tol: *const SdTolerance,
    out_residual: *mut f64,
) -> SdStatus {
    unsafe {
        pair_check(
            a,
            b,
            tol,
            out_residual,
            pipeline::check_commute,
            |residual| Error::NotCommuting { residual },
        )
    }
}

/// Star-commutator check, same contract as `sd_check_commute` for
/// `a^H b - b a^H`.
///
/// # Safety
/// `a` and `b` must be live handles; `out_residual` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sd_check_star_commute(
    a: *const SdMatrix,
    b: *const SdMatrix,
    tol: *const SdTolerance,
    out_residual: *mut f64,
) -> SdStatus {
    unsafe {
        pair_check(
            a,
            b,
            tol,
            out_residual,
            svd::check_star_commute,
            |residual| Error::NotStarCommuting { residual },
        )
    }
}

/// Eigenvalues of a square matrix in canonical order (descending real part,
/// then descending imaginary part). `len` must equal the dimension.
///
/// # Safety
/// `a` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sd_eigenvalues(
    a: *const SdMatrix,
    out: *mut SdComplex,
    len: usize,
) -> SdStatus {
    let Some(a) = (unsafe { a.as_ref() }) else {
        return null_arg("a");
    };
    if out.is_null() {
        return null_arg("out");
    }
    if len != a.0.rows() {
        return length_mismatch("out", a.0.rows(), len);
    }
    match eigen::eigenvalues_only(&a.0) {
        Ok(values) => {
            let target = unsafe { slice::from_raw_parts_mut(out, len) };
            for (dst, src) in target.iter_mut().zip(values) {
                *dst = from_scalar(src);
            }
            SdStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Simultaneously diagonalizes a commuting pair. A null `tol` selects the
/// defaults. The caller owns the result handle.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable. Release the
/// result with `sd_simdiag_free`.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag(
    a: *const SdMatrix,
    b: *const SdMatrix,
    tol: *const SdTolerance,
    out: *mut *mut SdSimdiag,
) -> SdStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let Some(a) = (unsafe { a.as_ref() }) else {
        return null_arg("a");
    };
    let Some(b) = (unsafe { b.as_ref() }) else {
        return null_arg("b");
    };
    let config = match unsafe { resolve_tol(tol) } {
        Ok(c) => c,
        Err(status) => return status,
    };
    match pipeline::simultaneous_diagonalize(&a.0, &b.0, &config) {
        Ok(res) => {
            unsafe { *out = Box::into_raw(Box::new(SdSimdiag(res))) };
            SdStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// # Safety
/// `res` must be null or an unfreed handle from `sd_simdiag`.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_free(res: *mut SdSimdiag) {
    if !res.is_null() {
        drop(unsafe { Box::from_raw(res) });
    }
}

/// Problem dimension, or 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_dim(res: *const SdSimdiag) -> usize {
    unsafe { res.as_ref() }.map_or(0, |r| r.0.s_common.rows())
}

/// Copies the common eigenvector matrix into a fresh handle owned by the
/// caller.
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_basis(
    res: *const SdSimdiag,
    out: *mut *mut SdMatrix,
) -> SdStatus {
    let Some(res) = (unsafe { res.as_ref() }) else {
        return null_arg("res");
    };
    if out.is_null() {
        return null_arg("out");
    }
    export_matrix(res.0.s_common.clone(), out)
}

unsafe fn copy_diag(diag: &[ComplexScalar], out: *mut SdComplex, len: usize) -> SdStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if len != diag.len() {
        return length_mismatch("out", diag.len(), len);
    }
    let target = unsafe { slice::from_raw_parts_mut(out, len) };
    for (dst, src) in target.iter_mut().zip(diag) {
        *dst = from_scalar(*src);
    }
    SdStatus::Ok
}

/// Eigenvalues of `a` per output column. `len` must equal the dimension.
///
/// # Safety
/// `res` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_diag_a(
    res: *const SdSimdiag,
    out: *mut SdComplex,
    len: usize,
) -> SdStatus {
    let Some(res) = (unsafe { res.as_ref() }) else {
        return null_arg("res");
    };
    unsafe { copy_diag(&res.0.diag_a, out, len) }
}

/// Eigenvalues of `b` per output column.
///
/// # Safety
/// `res` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_diag_b(
    res: *const SdSimdiag,
    out: *mut SdComplex,
    len: usize,
) -> SdStatus {
    let Some(res) = (unsafe { res.as_ref() }) else {
        return null_arg("res");
    };
    unsafe { copy_diag(&res.0.diag_b, out, len) }
}

/// Relative diagonalization residual for `a`, or NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_residual_a(res: *const SdSimdiag) -> f64 {
    unsafe { res.as_ref() }.map_or(f64::NAN, |r| r.0.residual_a)
}

/// Relative diagonalization residual for `b`, or NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_simdiag_residual_b(res: *const SdSimdiag) -> f64 {
    unsafe { res.as_ref() }.map_or(f64::NAN, |r| r.0.residual_b)
}

/// Shared-left-basis SVD of a commuting, star-commuting pair. A null `tol`
/// selects the defaults. The caller owns the result handle.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable. Release the
/// result with `sd_svd_free`.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_pair(
    a: *const SdMatrix,
    b: *const SdMatrix,
    tol: *const SdTolerance,
    out: *mut *mut SdSvd,
) -> SdStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let Some(a) = (unsafe { a.as_ref() }) else {
        return null_arg("a");
    };
    let Some(b) = (unsafe { b.as_ref() }) else {
        return null_arg("b");
    };
    let config = match unsafe { resolve_tol(tol) } {
        Ok(c) => c,
        Err(status) => return status,
    };
    match svd::svd_commuting_pair(&a.0, &b.0, &config) {
        Ok(res) => {
            unsafe { *out = Box::into_raw(Box::new(SdSvd(res))) };
            SdStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// # Safety
/// `res` must be null or an unfreed handle from `sd_svd_pair`.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_free(res: *mut SdSvd) {
    if !res.is_null() {
        drop(unsafe { Box::from_raw(res) });
    }
}

/// Problem dimension, or 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_dim(res: *const SdSvd) -> usize {
    unsafe { res.as_ref() }.map_or(0, |r| r.0.u.rows())
}

unsafe fn svd_factor(
    res: *const SdSvd,
    out: *mut *mut SdMatrix,
    pick: impl Fn(&svd::CommutingSvdResult) -> &Matrix,
) -> SdStatus {
    let Some(res) = (unsafe { res.as_ref() }) else {
        return null_arg("res");
    };
    if out.is_null() {
        return null_arg("out");
    }
    export_matrix(pick(&res.0).clone(), out)
}

/// Copies the shared left factor `u` into a fresh handle owned by the
/// caller.
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_u(res: *const SdSvd, out: *mut *mut SdMatrix) -> SdStatus {
    unsafe { svd_factor(res, out, |r| &r.u) }
}

/// Copies the right factor of `a`.
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_v_a(res: *const SdSvd, out: *mut *mut SdMatrix) -> SdStatus {
    unsafe { svd_factor(res, out, |r| &r.v_a) }
}

/// Copies the right factor of `b`.
///
/// # Safety
/// `res` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_v_b(res: *const SdSvd, out: *mut *mut SdMatrix) -> SdStatus {
    unsafe { svd_factor(res, out, |r| &r.v_b) }
}

unsafe fn copy_sigma(sigma: &[f64], out: *mut f64, len: usize) -> SdStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if len != sigma.len() {
        return length_mismatch("out", sigma.len(), len);
    }
    unsafe { slice::from_raw_parts_mut(out, len) }.copy_from_slice(sigma);
    SdStatus::Ok
}

/// Singular values of `a` per column of `u`. `len` must equal the
/// dimension.
///
/// # Safety
/// `res` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_sigma_a(res: *const SdSvd, out: *mut f64, len: usize) -> SdStatus {
    let Some(res) = (unsafe { res.as_ref() }) else {
        return null_arg("res");
    };
    unsafe { copy_sigma(&res.0.sigma_a, out, len) }
}

/// Singular values of `b` per column of `u`.
///
/// # Safety
/// `res` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_sigma_b(res: *const SdSvd, out: *mut f64, len: usize) -> SdStatus {
    let Some(res) = (unsafe { res.as_ref() }) else {
        return null_arg("res");
    };
    unsafe { copy_sigma(&res.0.sigma_b, out, len) }
}

/// Relative reconstruction residual for `a`, or NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_residual_a(res: *const SdSvd) -> f64 {
    unsafe { res.as_ref() }.map_or(f64::NAN, |r| r.0.residual_a)
}

/// Relative reconstruction residual for `b`, or NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_svd_residual_b(res: *const SdSvd) -> f64 {
    unsafe { res.as_ref() }.map_or(f64::NAN, |r| r.0.residual_b)
}

/// Conjugates `a` by the permutation sending index `i` to `image[i]`,
/// producing `p a p^T` in a fresh handle owned by the caller. `len` must
/// equal the dimension of `a`.
///
/// # Safety
/// `a` must be a live handle; `image` must point to `len` readable values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_conjugate_by_permutation(
    a: *const SdMatrix,
    image: *const usize,
    len: usize,
    out: *mut *mut SdMatrix,
) -> SdStatus {
    let Some(a) = (unsafe { a.as_ref() }) else {
        return null_arg("a");
    };
    if image.is_null() {
        return null_arg("image");
    }
    if out.is_null() {
        return null_arg("out");
    }
    if len != a.0.rows() {
        return length_mismatch("image", a.0.rows(), len);
    }
    let image = unsafe { slice::from_raw_parts(image, len) }.to_vec();
    let spec = match permutation::PermutationSpec::new(image) {
        Ok(spec) => spec,
        Err(e) => return fail(&e),
    };
    match permutation::conjugate(&a.0, &spec) {
        Ok(m) => export_matrix(m, out),
        Err(e) => fail(&e),
    }
}
