//! C ABI for `entmon`.
//!
//! Objects cross the boundary as opaque handles created by `em_*_new` and
//! released by the matching `em_*_free`. Every fallible call returns an
//! [`EmStatus`]; on failure [`em_last_error`] gives a message for the
//! calling thread. Panics are caught and reported as `EM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use entmon::conversion::{self, AlphaGrid};
use entmon::dilution::{self, DilutionTarget};
use entmon::monotone::{e_alpha, AlphaParam};
use entmon::state::{schmidt_spectrum, PureState, SchmidtSpectrum};
use entmon::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidState = 4,
    Precondition = 5,
    SeparableTarget = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Bipartite pure state.
pub struct EmPureState(PureState);

/// Sorted Schmidt spectrum.
pub struct EmSpectrum(SchmidtSpectrum);

/// One sample of a dilution curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EmDilutionPoint {
    pub r: u64,
    pub m_of_r: f64,
    pub tail: f64,
    pub fidelity_squared: f64,
    pub fidelity_normalized: f64,
    pub e1: f64,
    pub e_alpha: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EmStatus {
    match e {
        Error::DimensionMismatch(_) => EmStatus::DimensionMismatch,
        Error::InvalidState(_) => EmStatus::InvalidState,
        Error::SeparableTarget => EmStatus::SeparableTarget,
        Error::Precondition(_) => EmStatus::Precondition,
        _ => EmStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (EmStatus, String)>) -> EmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside entmon".into());
            EmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (EmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (EmStatus, String) {
    (EmStatus::NullPointer, format!("{what} is null"))
}

/// Message describing the last failed call on this thread, or null.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn em_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn em_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a state on `C^dim_a ⊗ C^dim_b` from `dim_a*dim_b` row-major
/// amplitudes, normalizing them. `im` may be null for real amplitudes.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `dim_a*dim_b` doubles; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn em_state_new(
    dim_a: usize,
    dim_b: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut EmPureState,
) -> EmStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = dim_a.checked_mul(dim_b).ok_or((EmStatus::InvalidArgument, "dimension overflow".into()))?;
        let re = std::slice::from_raw_parts(re, n);
        let amps: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, n);
            re.iter().zip(im).map(|(&x, &y)| Complex64::new(x, y)).collect()
        };
        let psi = PureState::from_unnormalized(dim_a, dim_b, amps).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EmPureState(psi)));
        Ok(())
    })
}

/// # Safety
/// `state` must come from [`em_state_new`] and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn em_state_free(state: *mut EmPureState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Schmidt spectrum of a state as a new handle.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn em_state_schmidt(state: *const EmPureState, out: *mut *mut EmSpectrum) -> EmStatus {
    guard(|| {
        let state = state.as_ref().ok_or_else(|| null("state"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(EmSpectrum(schmidt_spectrum(&state.0))));
        Ok(())
    })
}

/// Spectrum from `len` non-negative weights, normalized and sorted.
///
/// # Safety
/// `values` must point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn em_spectrum_new(values: *const f64, len: usize, out: *mut *mut EmSpectrum) -> EmStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let weights = std::slice::from_raw_parts(values, len);
        let s = SchmidtSpectrum::from_weights(weights).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EmSpectrum(s)));
        Ok(())
    })
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `spectrum` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn em_spectrum_len(spectrum: *const EmSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the coefficients (descending) into `buf` of capacity `cap`.
///
/// # Safety
/// `spectrum` must be a live handle and `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn em_spectrum_values(spectrum: *const EmSpectrum, buf: *mut f64, cap: usize) -> EmStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let v = s.0.values();
        if cap < v.len() {
            return Err((EmStatus::BufferTooSmall, format!("need {} entries, have {cap}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// # Safety
/// `spectrum` must come from this library and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn em_spectrum_free(spectrum: *mut EmSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// α-entropy of entanglement in bits, `α ∈ [0, 1]`.
///
/// # Safety
/// `spectrum` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn em_e_alpha(spectrum: *const EmSpectrum, alpha: f64, out: *mut f64) -> EmStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = e_alpha(&s.0, AlphaParam::new(alpha).map_err(lib_err)?);
        Ok(())
    })
}

/// Upper bound on the probability of converting `source` into `target` over
/// a uniform α grid of `grid_points` points. `minimizing_alpha` may be null.
///
/// # Safety
/// Handles must be live; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn em_bound_single(
    source: *const EmSpectrum,
    target: *const EmSpectrum,
    grid_points: usize,
    value: *mut f64,
    minimizing_alpha: *mut f64,
) -> EmStatus {
    guard(|| {
        let s = source.as_ref().ok_or_else(|| null("source"))?;
        let t = target.as_ref().ok_or_else(|| null("target"))?;
        let value = value.as_mut().ok_or_else(|| null("value"))?;
        let grid = AlphaGrid::uniform(grid_points).map_err(lib_err)?;
        let b = conversion::bound_single(&s.0, &t.0, &grid).map_err(lib_err)?;
        *value = b.value;
        if let Some(a) = minimizing_alpha.as_mut() {
            *a = b.minimizing_alpha;
        }
        Ok(())
    })
}

/// `Σ_{l≤r} C(n,l) cos²θ^(n-l) sin²θ^l` for `θ ∈ (0, π/4)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn em_tail_mass(theta: f64, n_tilde: u64, r: u64, out: *mut f64) -> EmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let target = DilutionTarget::new(theta).map_err(lib_err)?;
        *out = dilution::tail_mass(&target, n_tilde, r).map_err(lib_err)?;
        Ok(())
    })
}

/// Dilution curve at a single truncation fraction `x`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn em_dilution_point(
    theta: f64,
    n_tilde: u64,
    x: f64,
    alpha: f64,
    out: *mut EmDilutionPoint,
) -> EmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let target = DilutionTarget::new(theta).map_err(lib_err)?;
        let c = dilution::entropy_curves(&target, n_tilde, &[x], &[alpha]).map_err(lib_err)?;
        *out = EmDilutionPoint {
            r: c.r[0],
            m_of_r: c.m_of_r[0],
            tail: c.tail[0],
            fidelity_squared: c.fidelity_squared[0],
            fidelity_normalized: c.fidelity_normalized[0],
            e1: c.e1_per_copy[0],
            e_alpha: c.e_alpha_per_copy[0].1[0],
        };
        Ok(())
    })
}
