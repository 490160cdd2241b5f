//! C ABI over the core crate.
//!
//! Objects live behind opaque handles created by `*_new`/`*_simulate` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`SparStatus`]; on failure [`spar_last_error`] describes the most recent error
//! on the calling thread. Results are written through out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spar::covariance::{CovKernel, CovMethod};
use spar::estimate::lse;
use spar::limits::{limit_law, rate};
use spar::model::{CaseTag, Field, ModelParams, NearlyUnstableDesign, TriangleWindow};
use spar::rng::{InnovationDist, RngStream};
use spar::simulate::{simulate, SimMethod};
use spar::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonStationary = 3,
    NotPositiveDefinite = 4,
    Singular = 5,
    Unsupported = 6,
    MissingData = 7,
    Panic = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparCovMethod {
    ClosedForm = 0,
    AppellF4 = 1,
    BinomialRep = 2,
    SeriesOracle = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparSimMethod {
    BoundaryCholesky = 0,
    FullCholesky = 1,
    BoundarySeries = 2,
    /// Uses the `margin` argument of [`spar_field_simulate`].
    TruncatedSeries = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparDist {
    Gaussian = 0,
    Rademacher = 1,
    Uniform = 2,
}

/// Least-squares fit; matrices are row-major.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SparEstimate {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub b: [f64; 4],
    pub c: [f64; 2],
    pub det_b: f64,
    /// Score vector; only meaningful when `has_score` is nonzero.
    pub a: [f64; 2],
    pub has_score: u8,
}

/// Limit law of a design; `covariance` is row-major.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SparLimit {
    /// 0 interior, 1 boundary.
    pub boundary_case: u8,
    pub singular: u8,
    pub normalized_only: u8,
    pub covariance: [f64; 4],
    /// NaN in the interior case.
    pub theta: f64,
    /// NaN in the interior case; may be infinite.
    pub omega: f64,
}

pub struct SparKernel {
    inner: CovKernel,
}

pub struct SparDesign {
    inner: NearlyUnstableDesign,
}

pub struct SparField {
    inner: Field,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SparStatus {
    match e {
        Error::NonStationary { .. } | Error::Divergent(_) => SparStatus::NonStationary,
        Error::NotSpd { .. } => SparStatus::NotPositiveDefinite,
        Error::SingularDesign { .. } | Error::Singular | Error::TooManySingular { .. } => SparStatus::Singular,
        Error::MethodUnsupported { .. } | Error::WrongQuadrant { .. } | Error::Indeterminate | Error::RateUndefined(_) => {
            SparStatus::Unsupported
        }
        Error::MissingValues(..) | Error::MissingInnovations => SparStatus::MissingData,
        Error::OutOfRange(_) | Error::InvalidConfig(_) => SparStatus::InvalidArgument,
        _ => SparStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic for [`spar_last_error`].
fn guard(f: impl FnOnce() -> Result<(), SparStatus>) -> SparStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SparStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside spar".into());
            SparStatus::Panic
        }
    }
}

fn fail(e: Error) -> SparStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(name: &str) -> SparStatus {
    set_error(format!("{name} is null"));
    SparStatus::NullPointer
}

/// Message of the last failed call on this thread. The pointer stays valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn spar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spar_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Creates a covariance kernel for `(alpha, beta)`. `tol` bounds the series
/// truncation error of the series-based methods.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn spar_kernel_new(
    alpha: f64,
    beta: f64,
    method: SparCovMethod,
    tol: f64,
    out: *mut *mut SparKernel,
) -> SparStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let method = match method {
            SparCovMethod::ClosedForm => CovMethod::ClosedForm,
            SparCovMethod::AppellF4 => CovMethod::AppellF4,
            SparCovMethod::BinomialRep => CovMethod::BinomialRep,
            SparCovMethod::SeriesOracle => CovMethod::SeriesOracle,
        };
        let inner = CovKernel::new(ModelParams::new(alpha, beta), method, tol).map_err(fail)?;
        *out = Box::into_raw(Box::new(SparKernel { inner }));
        Ok(())
    })
}

/// Writes `R(k, l)` to `out`.
///
/// # Safety
/// `kernel` must come from [`spar_kernel_new`] and not be freed; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spar_kernel_cov(kernel: *const SparKernel, k: i64, l: i64, out: *mut f64) -> SparStatus {
    guard(|| {
        let kernel = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = kernel.inner.get(k, l).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a handle from [`spar_kernel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spar_kernel_free(kernel: *mut SparKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Creates a nearly-unstable design with constant `gamma`, `delta` around the
/// boundary point `(alpha, beta)`, `|alpha| + |beta| = 1`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn spar_design_new(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    out: *mut *mut SparDesign,
) -> SparStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = NearlyUnstableDesign::constant(alpha, beta, gamma, delta).map_err(fail)?;
        *out = Box::into_raw(Box::new(SparDesign { inner }));
        Ok(())
    })
}

/// Writes the model coefficients at index `m`.
///
/// # Safety
/// `design` must be a live handle; `alpha_m`, `beta_m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spar_design_params(
    design: *const SparDesign,
    m: u64,
    alpha_m: *mut f64,
    beta_m: *mut f64,
) -> SparStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if alpha_m.is_null() || beta_m.is_null() {
            return Err(null("output"));
        }
        let p = d.inner.params_at(m).map_err(fail)?;
        *alpha_m = p.alpha;
        *beta_m = p.beta;
        Ok(())
    })
}

/// Writes the limit law, with `omega` probed at `m_probe`.
///
/// # Safety
/// `design` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spar_design_limit(design: *const SparDesign, m_probe: u64, out: *mut SparLimit) -> SparStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let law = limit_law(&d.inner, m_probe).map_err(fail)?;
        *out = SparLimit {
            boundary_case: u8::from(law.case_tag == CaseTag::Boundary),
            singular: u8::from(law.singular),
            normalized_only: u8::from(law.normalized_only),
            covariance: law.covariance.entries(),
            theta: law.theta.unwrap_or(f64::NAN),
            omega: law.omega.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Writes the convergence rate at model index `m` and window sum `s`.
///
/// # Safety
/// `design` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spar_design_rate(design: *const SparDesign, m: u64, s: u64, out: *mut f64) -> SparStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = rate(&d.inner, m, s).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spar_design_free(design: *mut SparDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Draws a field on the window `T(k, l)` from stream `rep` of `seed`. `margin`
/// is read only by [`SparSimMethod::TruncatedSeries`].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn spar_field_simulate(
    alpha: f64,
    beta: f64,
    k: i64,
    l: i64,
    method: SparSimMethod,
    margin: u32,
    dist: SparDist,
    seed: u64,
    rep: u64,
    out: *mut *mut SparField,
) -> SparStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let method = match method {
            SparSimMethod::BoundaryCholesky => SimMethod::BoundaryCholesky,
            SparSimMethod::FullCholesky => SimMethod::FullCholesky,
            SparSimMethod::BoundarySeries => SimMethod::BoundarySeries,
            SparSimMethod::TruncatedSeries => SimMethod::TruncatedSeries { margin },
        };
        let dist = match dist {
            SparDist::Gaussian => InnovationDist::Gaussian,
            SparDist::Rademacher => InnovationDist::Rademacher,
            SparDist::Uniform => InnovationDist::UniformUnitVar,
        };
        let w = TriangleWindow::new(k, l);
        let inner = simulate(ModelParams::new(alpha, beta), w, method, dist, &mut RngStream::new(seed, rep))
            .map_err(fail)?;
        *out = Box::into_raw(Box::new(SparField { inner }));
        Ok(())
    })
}

/// Number of hull values in the field.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spar_field_len(field: *const SparField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.values().len())
}

/// Value at lattice point `(i, j)` of the hull.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spar_field_value(field: *const SparField, i: i64, j: i64, out: *mut f64) -> SparStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.inner.value(i, j).ok_or_else(|| fail(Error::MissingValues(i, j)))?;
        Ok(())
    })
}

/// Copies the hull values, anti-diagonal by anti-diagonal, into `buf`
/// (`len` must be at least [`spar_field_len`]).
///
/// # Safety
/// `field` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spar_field_values(field: *const SparField, buf: *mut f64, len: usize) -> SparStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let v = f.inner.values();
        if len < v.len() {
            set_error(format!("buffer holds {len} values, field has {}", v.len()));
            return Err(SparStatus::InvalidArgument);
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Least-squares fit over the field's own window.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spar_field_estimate(field: *const SparField, out: *mut SparEstimate) -> SparStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let est = lse(&f.inner, f.inner.window()).map_err(fail)?;
        *out = SparEstimate {
            alpha_hat: est.alpha_hat,
            beta_hat: est.beta_hat,
            b: est.b.entries(),
            c: est.c,
            det_b: est.det_b,
            a: est.a.unwrap_or([f64::NAN; 2]),
            has_score: u8::from(est.a.is_some()),
        };
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spar_field_free(field: *mut SparField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
