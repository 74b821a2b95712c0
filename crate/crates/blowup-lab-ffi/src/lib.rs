//! C ABI for the blowup-lab numerical laboratory.
//!
//! The entry point is an opaque workspace handle bundling the ground state,
//! the first-order blow-up profile, and the blow-up law for one `(dim, sigma)`
//! pair. All functions return a status code; `blc_last_error_message` retrieves
//! a human-readable description of the most recent failure on the calling
//! thread. No function panics across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use blowup_lab::grid::GridSpec;
use blowup_lab::ground_state::solve_ground_state;
use blowup_lab::law::{self, LawParams};
use blowup_lab::linops::LinearizedPair;
use blowup_lab::profile::{solve_s000, ProfileOrder1};
use blowup_lab::rate::fit_rate;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

/// Status code returned by every fallible function of this library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlcStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// An argument was outside its documented domain.
    InvalidArgument = 2,
    /// A provided buffer length did not match the expected length.
    BadLength = 3,
    /// An internal solver failed to converge or a numerical check failed.
    NumericsFailed = 4,
    /// A panic was caught at the boundary; state may be inconsistent.
    Panic = 5,
}

fn status_of(err: &blowup_lab::error::Error) -> BlcStatus {
    use blowup_lab::error::Error;
    set_error(&err.to_string());
    match err {
        Error::Config(_) | Error::SigmaOutOfRange(..) | Error::OutOfRange(_) => {
            BlcStatus::InvalidArgument
        }
        Error::GridMismatch | Error::GridTooSmall => BlcStatus::BadLength,
        _ => BlcStatus::NumericsFailed,
    }
}

/// Opaque workspace: ground state, linearized pair, first-order profile and
/// blow-up law for a fixed `(dim, sigma, e0, lambda0)`.
pub struct BlcWorkspace {
    pair: LinearizedPair,
    profile: ProfileOrder1,
    law: LawParams,
}

/// Coefficients of the blow-up rate fit
/// `log lambda = exponent*log|t| + log_coeff*log log(1/|t|) + intercept`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BlcRateFit {
    pub exponent: f64,
    pub log_coeff: f64,
    pub intercept: f64,
    /// RMS residual of the full model.
    pub residual: f64,
    /// RMS residual with the log-correction term removed.
    pub residual_power_only: f64,
    /// Decades of lambda-decrease covered by the data.
    pub decades: f64,
}

fn guarded<F: FnOnce() -> BlcStatus>(f: F) -> BlcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            BlcStatus::Panic
        }
    }
}

/// Build a workspace for spatial dimension `dim` (1 or 2) and potential
/// strength `sigma` in `(0, min(dim/4, 1))`. `e0` is the conserved energy used
/// by the blow-up law; `lambda0 <= 0` selects the default anchor scale.
/// On success `*out` owns the workspace; release it with `blc_workspace_free`.
#[no_mangle]
pub extern "C" fn blc_workspace_new(
    dim: u32,
    sigma: f64,
    e0: f64,
    lambda0: f64,
    out: *mut *mut BlcWorkspace,
) -> BlcStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BlcStatus::NullPointer;
    }
    guarded(|| {
        let build = || -> blowup_lab::error::Result<BlcWorkspace> {
            let grid = GridSpec::standard(dim as usize).build()?;
            let gs = solve_ground_state(dim as usize, grid, 1e-12)?;
            let pair = LinearizedPair::build(Arc::new(gs))?;
            let profile = solve_s000(&pair, sigma)?;
            let anchor = if lambda0 > 0.0 { Some(lambda0) } else { None };
            let law = LawParams::new(&profile.betas, e0, anchor)?;
            Ok(BlcWorkspace { pair, profile, law })
        };
        match build() {
            Ok(ws) => {
                unsafe { *out = Box::into_raw(Box::new(ws)) };
                BlcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Release a workspace created by `blc_workspace_new`. Null is a no-op.
#[no_mangle]
pub extern "C" fn blc_workspace_free(ws: *mut BlcWorkspace) {
    if !ws.is_null() {
        drop(unsafe { Box::from_raw(ws) });
    }
}

unsafe fn deref<'a>(ws: *const BlcWorkspace) -> Option<&'a BlcWorkspace> {
    ws.as_ref()
}

macro_rules! require {
    ($ptr:expr, $name:literal) => {
        match unsafe { deref($ptr) } {
            Some(w) => w,
            None => {
                set_error(concat!($name, ": workspace pointer is null"));
                return BlcStatus::NullPointer;
            }
        }
    };
}

fn write_out(out: *mut f64, v: f64) -> BlcStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BlcStatus::NullPointer;
    }
    unsafe { *out = v };
    BlcStatus::Ok
}

/// Profile coefficients `beta1`, `beta2`, `beta1_prime`. Null outputs are skipped.
#[no_mangle]
pub extern "C" fn blc_profile_betas(
    ws: *const BlcWorkspace,
    beta1: *mut f64,
    beta2: *mut f64,
    beta1_prime: *mut f64,
) -> BlcStatus {
    let w = require!(ws, "blc_profile_betas");
    unsafe {
        if !beta1.is_null() {
            *beta1 = w.profile.beta1;
        }
        if !beta2.is_null() {
            *beta2 = w.profile.beta2;
        }
        if !beta1_prime.is_null() {
            *beta1_prime = w.profile.beta1_prime;
        }
    }
    BlcStatus::Ok
}

/// Phase of the approximate solution at scale `lambda` in (0, 1).
#[no_mangle]
pub extern "C" fn blc_profile_theta(
    ws: *const BlcWorkspace,
    lambda: f64,
    out: *mut f64,
) -> BlcStatus {
    let w = require!(ws, "blc_profile_theta");
    guarded(|| match w.profile.theta(lambda) {
        Ok(v) => write_out(out, v),
        Err(e) => status_of(&e),
    })
}

/// Rescaled time `s` at which the law reaches scale `lambda`.
#[no_mangle]
pub extern "C" fn blc_law_s_of_lambda(
    ws: *const BlcWorkspace,
    lambda: f64,
    out: *mut f64,
) -> BlcStatus {
    let w = require!(ws, "blc_law_s_of_lambda");
    guarded(|| match law::eval_j(lambda, &w.law) {
        Ok(v) => write_out(out, v),
        Err(e) => status_of(&e),
    })
}

/// Scale `lambda` of the law at rescaled time `s`.
#[no_mangle]
pub extern "C" fn blc_law_lambda_of_s(
    ws: *const BlcWorkspace,
    s: f64,
    out: *mut f64,
) -> BlcStatus {
    let w = require!(ws, "blc_law_lambda_of_s");
    guarded(|| match law::invert_j(s, &w.law) {
        Ok(v) => write_out(out, v),
        Err(e) => status_of(&e),
    })
}

/// Modulation parameter `b` of the law at rescaled time `s`.
#[no_mangle]
pub extern "C" fn blc_law_b_of_s(ws: *const BlcWorkspace, s: f64, out: *mut f64) -> BlcStatus {
    let w = require!(ws, "blc_law_b_of_s");
    guarded(|| match law::b_app(s, &w.law) {
        Ok(v) => write_out(out, v),
        Err(e) => status_of(&e),
    })
}

/// Lab time `t < 0` (blow-up at `t = 0`) corresponding to rescaled time `s`.
#[no_mangle]
pub extern "C" fn blc_law_t_of_s(ws: *const BlcWorkspace, s: f64, out: *mut f64) -> BlcStatus {
    let w = require!(ws, "blc_law_t_of_s");
    guarded(|| match law::t_app(s, &w.law) {
        Ok(v) => write_out(out, v),
        Err(e) => status_of(&e),
    })
}

/// Rescaled time `s` corresponding to lab time `t < 0`.
#[no_mangle]
pub extern "C" fn blc_law_s_of_t(ws: *const BlcWorkspace, t: f64, out: *mut f64) -> BlcStatus {
    let w = require!(ws, "blc_law_s_of_t");
    guarded(|| match law::s_of_t(t, &w.law) {
        Ok(v) => write_out(out, v),
        Err(e) => status_of(&e),
    })
}

/// Number of radial grid nodes of the workspace's ground state.
#[no_mangle]
pub extern "C" fn blc_grid_len(ws: *const BlcWorkspace) -> usize {
    match unsafe { deref(ws) } {
        Some(w) => w.pair.gs().grid().len(),
        None => 0,
    }
}

/// Copy the radial nodes and ground-state values into caller buffers of
/// length `len`, which must equal `blc_grid_len`. Null buffers are skipped.
#[no_mangle]
pub extern "C" fn blc_ground_state_copy(
    ws: *const BlcWorkspace,
    r: *mut f64,
    q: *mut f64,
    len: usize,
) -> BlcStatus {
    let w = require!(ws, "blc_ground_state_copy");
    let grid = w.pair.gs().grid();
    let n = grid.len();
    if len != n {
        set_error("buffer length does not match grid length");
        return BlcStatus::BadLength;
    }
    let qf = w.pair.gs().q();
    for i in 0..n {
        unsafe {
            if !r.is_null() {
                *r.add(i) = grid.nodes()[i];
            }
            if !q.is_null() {
                *q.add(i) = qf.values()[i].re;
            }
        }
    }
    BlcStatus::Ok
}

/// Fit the blow-up rate model to `n` samples `(t[i], lambda[i])` with
/// `-1 < t[i] < 0` (blow-up at `t = 0`) and `lambda[i] > 0`. Requires at
/// least 4 samples spanning one decade of lambda-decrease.
#[no_mangle]
pub extern "C" fn blc_fit_rate(
    t: *const f64,
    lambda: *const f64,
    n: usize,
    out: *mut BlcRateFit,
) -> BlcStatus {
    if t.is_null() || lambda.is_null() || out.is_null() {
        set_error("blc_fit_rate: null pointer argument");
        return BlcStatus::NullPointer;
    }
    guarded(|| {
        let ts = unsafe { std::slice::from_raw_parts(t, n) };
        let ls = unsafe { std::slice::from_raw_parts(lambda, n) };
        match fit_rate(ts, ls) {
            Ok(fit) => {
                unsafe {
                    *out = BlcRateFit {
                        exponent: fit.exponent,
                        log_coeff: fit.log_coeff,
                        intercept: fit.intercept,
                        residual: fit.residual,
                        residual_power_only: fit.residual_power_only,
                        decades: fit.decades,
                    };
                }
                BlcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Copy the most recent error message on this thread into `buf` (NUL
/// terminated, truncated to `len` bytes). A zero-length buffer is a no-op.
#[no_mangle]
pub extern "C" fn blc_last_error_message(buf: *mut c_char, len: usize) {
    if buf.is_null() || len == 0 {
        return;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        let n = bytes.len().min(len - 1);
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
    });
}
