//! C ABI over `qmphase`.
//!
//! Distributions are returned as opaque handles that the caller releases
//! with `qm_distribution_free`. Every fallible call returns a `QmStatus`;
//! on failure `qm_last_error` describes what went wrong on this thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qmphase::dp::{afm_distribution, fm_distribution, ConditionedDistribution};
use qmphase::phase::{classify, Phase};
use qmphase::qubit::{ModelParams, StateVector};
use qmphase::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericFailure = 3,
    BufferTooSmall = 4,
    Mismatched = 5,
    Panic = 6,
}

/// Model parameters. The initial state is `(1, rho_z, rho_x)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QmParams {
    pub theta: f64,
    pub omega: f64,
    pub r_tau: f64,
    /// Number of measurements; must be even and at least 2.
    pub n_meas: u32,
    pub rho_z: f64,
    pub rho_x: f64,
}

/// Unnormalized conditioned Bloch vector of one histogram bin.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmState {
    pub rho0: f64,
    pub rhoz: f64,
    pub rhox: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmPhase {
    Polarized = 0,
    Unpolarized = 1,
    AntiPolarized = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmPhaseLabel {
    pub phase: QmPhase,
    pub fm_argmax: f64,
    pub afm_argmax: f64,
    pub conflict: bool,
}

/// Opaque distribution handle.
pub struct QmDistribution {
    inner: ConditionedDistribution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numeric() {
            QmStatus::NumericFailure
        } else if matches!(e, Error::MismatchedParams) {
            QmStatus::Mismatched
        } else {
            QmStatus::InvalidArgument
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            QmStatus::Panic
        }
    }
}

unsafe fn read_params(params: *const QmParams) -> Result<ModelParams, Failure> {
    let p = params.as_ref().ok_or_else(|| null("params"))?;
    Ok(ModelParams::new(
        p.theta,
        p.omega,
        p.r_tau,
        p.n_meas as usize,
        StateVector::new(1.0, p.rho_z, p.rho_x),
    )?)
}

unsafe fn handle<'a>(d: *const QmDistribution) -> Result<&'a ConditionedDistribution, Failure> {
    d.as_ref().map(|h| &h.inner).ok_or_else(|| null("distribution"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

unsafe fn build(
    params: *const QmParams,
    out: *mut *mut QmDistribution,
    f: fn(&ModelParams) -> qmphase::Result<ConditionedDistribution>,
) -> QmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let inner = f(&read_params(params)?)?;
        *out = Box::into_raw(Box::new(QmDistribution { inner }));
        Ok(())
    })
}

/// Exact distribution of the number of up outcomes.
///
/// # Safety
/// `params` must point to a valid `QmParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_fm_distribution(
    params: *const QmParams,
    out: *mut *mut QmDistribution,
) -> QmStatus {
    build(params, out, fm_distribution)
}

/// Exact distribution of the staggered (pairwise) order.
///
/// # Safety
/// Same as `qm_fm_distribution`.
#[no_mangle]
pub unsafe extern "C" fn qm_afm_distribution(
    params: *const QmParams,
    out: *mut *mut QmDistribution,
) -> QmStatus {
    build(params, out, afm_distribution)
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `d` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn qm_distribution_free(d: *mut QmDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of bins (N + 1), or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qm_distribution_len(d: *const QmDistribution) -> usize {
    d.as_ref().map_or(0, |h| h.inner.len())
}

/// Copies the bin probabilities into `buf`, which must hold `len` doubles
/// with `len >= qm_distribution_len(d)`.
///
/// # Safety
/// `d` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qm_distribution_probabilities(
    d: *const QmDistribution,
    buf: *mut f64,
    len: usize,
) -> QmStatus {
    guard(|| {
        let dist = handle(d)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < dist.len() {
            return Err(Failure(
                QmStatus::BufferTooSmall,
                format!("need {} entries, got {len}", dist.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, dist.len());
        for (o, s) in out.iter_mut().zip(&dist.table) {
            *o = s.rho0;
        }
        Ok(())
    })
}

/// Conditioned state and order parameter of bin `index`.
///
/// # Safety
/// `d` must be a live handle; `state` and `order_param` must be writable
/// (either may be NULL to skip it).
#[no_mangle]
pub unsafe extern "C" fn qm_distribution_bin(
    d: *const QmDistribution,
    index: usize,
    state: *mut QmState,
    order_param: *mut f64,
) -> QmStatus {
    guard(|| {
        let dist = handle(d)?;
        let s = dist.table.get(index).ok_or_else(|| {
            Failure(
                QmStatus::InvalidArgument,
                format!("bin {index} out of range (len {})", dist.len()),
            )
        })?;
        if let Some(out) = state.as_mut() {
            *out = QmState {
                rho0: s.rho0,
                rhoz: s.rhoz,
                rhox: s.rhox,
            };
        }
        if let Some(out) = order_param.as_mut() {
            *out = dist.order_param(index);
        }
        Ok(())
    })
}

/// Bin index of the most likely outcome (ties near zero go to zero).
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qm_distribution_argmax(d: *const QmDistribution, out: *mut usize) -> QmStatus {
    guard(|| {
        let dist = handle(d)?;
        *out.as_mut().ok_or_else(|| null("out"))? = dist.argmax();
        Ok(())
    })
}

fn label_out(l: qmphase::phase::PhaseLabel) -> QmPhaseLabel {
    QmPhaseLabel {
        phase: match l.phase {
            Phase::Polarized => QmPhase::Polarized,
            Phase::Unpolarized => QmPhase::Unpolarized,
            Phase::AntiPolarized => QmPhase::AntiPolarized,
        },
        fm_argmax: l.fm_argmax,
        afm_argmax: l.afm_argmax,
        conflict: l.conflict,
    }
}

/// Phase label from an FM and an AFM handle of the same experiment.
///
/// # Safety
/// `fm` and `afm` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qm_classify(
    fm: *const QmDistribution,
    afm: *const QmDistribution,
    out: *mut QmPhaseLabel,
) -> QmStatus {
    guard(|| {
        let label = classify(handle(fm)?, handle(afm)?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = label_out(label);
        Ok(())
    })
}

/// Computes both distributions and classifies in one call.
///
/// # Safety
/// `params` must point to a valid `QmParams` and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_classify_params(params: *const QmParams, out: *mut QmPhaseLabel) -> QmStatus {
    guard(|| {
        let p = read_params(params)?;
        let label = qmphase::phase::classify_params(&p)?;
        *out.as_mut().ok_or_else(|| null("out"))? = label_out(label);
        Ok(())
    })
}
