//! C ABI over `symplectic-nlevel`.
//!
//! Conventions: every fallible function returns an [`NlStatus`] and writes its
//! result through an out-pointer. Test functions live behind the opaque
//! [`NlTestFunction`] handle, created with `nl_testfn_new` and released with
//! `nl_testfn_free`. After a non-OK status, `nl_last_error_message` returns
//! the message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use symplectic_nlevel::closedform::closed_form_auto;
use symplectic_nlevel::contour::{n_level_contour, ContourSpec};
use symplectic_nlevel::haar::mc_n_level;
use symplectic_nlevel::testfn::{FourierProfile, TestFunction, TestFunctionProduct};
use symplectic_nlevel::{Error, Method};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Numerical = 3,
    Singularity = 4,
    Capacity = 5,
    Panic = 6,
    Io = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlProfileKind {
    Triangle = 0,
    RaisedCosine = 1,
    PiecewisePolynomial = 2,
}

/// Which closed form produced a value.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlClosedForm {
    /// Total support ≤ 1.
    Pairing = 1,
    /// Total support < 2.
    SingleShift = 2,
    /// Total support < 3.
    DoubleShift = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NlEstimate {
    pub value: f64,
    /// Monte Carlo standard error, or the numerical error estimate.
    pub error: f64,
}

/// Opaque test-function handle.
pub struct NlTestFunction {
    inner: TestFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NlStatus {
    match e {
        Error::Domain(_) => NlStatus::Domain,
        Error::Numerical { .. } | Error::Truncation(_) => NlStatus::Numerical,
        Error::Singularity(_) => NlStatus::Singularity,
        Error::Capacity(_) => NlStatus::Capacity,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => NlStatus::Io,
    }
}

// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), NlStatus>) -> NlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NlStatus::Panic
        }
    }
}

fn check<T>(r: symplectic_nlevel::Result<T>) -> Result<T, NlStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> NlStatus {
    set_error("null pointer argument".into());
    NlStatus::NullPointer
}

unsafe fn product_from(fns: *const *const NlTestFunction, n: usize) -> Result<Vec<TestFunction>, NlStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if fns.is_null() {
        return Err(null());
    }
    let handles = std::slice::from_raw_parts(fns, n);
    handles
        .iter()
        .map(|&h| if h.is_null() { Err(null()) } else { Ok((*h).inner.clone()) })
        .collect()
}

/// Creates a test function. `coefficients` (length `n_coefficients`) is read
/// only for the piecewise-polynomial profile and may be NULL otherwise.
///
/// # Safety
/// `coefficients` must point to `n_coefficients` doubles when non-NULL;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_testfn_new(
    kind: NlProfileKind,
    sigma: f64,
    coefficients: *const f64,
    n_coefficients: usize,
    out: *mut *mut NlTestFunction,
) -> NlStatus {
    guard(|| {
        if out.is_null() || (coefficients.is_null() && n_coefficients > 0) {
            return Err(null());
        }
        let coeffs =
            if n_coefficients == 0 { Vec::new() } else { std::slice::from_raw_parts(coefficients, n_coefficients).to_vec() };
        let profile = match kind {
            NlProfileKind::Triangle => FourierProfile::triangle(sigma),
            NlProfileKind::RaisedCosine => FourierProfile::raised_cosine(sigma),
            NlProfileKind::PiecewisePolynomial => FourierProfile::piecewise_polynomial(sigma, coeffs),
        };
        let f = check(TestFunction::new(profile))?;
        *out = Box::into_raw(Box::new(NlTestFunction { inner: f }));
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `f` must come from `nl_testfn_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nl_testfn_free(f: *mut NlTestFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// f(x) on the real line.
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nl_testfn_eval(f: *const NlTestFunction, x: f64, out: *mut f64) -> NlStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return Err(null());
        }
        *out = (*f).inner.eval_real(x);
        Ok(())
    })
}

/// f̂(u).
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nl_testfn_fhat(f: *const NlTestFunction, u: f64, out: *mut f64) -> NlStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            return Err(null());
        }
        *out = (*f).inner.fhat(u);
        Ok(())
    })
}

/// N → ∞ n-level density of the product of `n` test functions, using the
/// closed form that matches its total support (< 3).
///
/// # Safety
/// `fns` must point to `n` valid handles; `out` must be valid; `form` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn nl_closed_form(
    fns: *const *const NlTestFunction,
    n: usize,
    out: *mut NlEstimate,
    form: *mut NlClosedForm,
) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let product = check(TestFunctionProduct::new(product_from(fns, n)?))?;
        let (method, b) = check(closed_form_auto(&product))?;
        *out = NlEstimate { value: b.total, error: b.error };
        if !form.is_null() {
            *form = match method {
                Method::ClosedFormQ1 => NlClosedForm::Pairing,
                Method::ClosedFormQ2 => NlClosedForm::SingleShift,
                _ => NlClosedForm::DoubleShift,
            };
        }
        Ok(())
    })
}

/// Monte Carlo estimate over `samples` Haar draws from USp(2N), N = `n_half`.
/// Deterministic for a given seed.
///
/// # Safety
/// `fns` must point to `n` valid handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nl_mc_n_level(
    n_half: usize,
    fns: *const *const NlTestFunction,
    n: usize,
    samples: usize,
    seed: u64,
    out: *mut NlEstimate,
) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let product = TestFunctionProduct::unrestricted(product_from(fns, n)?);
        let e = check(mc_n_level(n_half, &product, samples, seed))?;
        *out = NlEstimate { value: e.value, error: e.std_error };
        Ok(())
    })
}

/// Exact finite-N value by contour integration (n ≤ 2). `delta_scale` places
/// the contours at Re z = c·i/N; pass 0.5 for the default.
///
/// # Safety
/// `fns` must point to `n` valid handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nl_contour_n_level(
    n_half: usize,
    fns: *const *const NlTestFunction,
    n: usize,
    delta_scale: f64,
    out: *mut NlEstimate,
) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let product = check(TestFunctionProduct::new(product_from(fns, n)?))?;
        let spec = check(ContourSpec::for_n(n_half, n, delta_scale))?;
        let e = check(n_level_contour(n_half, &product, &spec))?;
        *out = NlEstimate { value: e.value, error: e.std_error };
        Ok(())
    })
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
