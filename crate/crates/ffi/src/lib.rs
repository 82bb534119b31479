//! C ABI for the hflc controller library.
//!
//! The surface is deliberately small: load a saved model file into an
//! opaque handle, evaluate single controllers, resolve the full cyclic
//! chain, and free the handle. Every fallible call returns an
//! [`HflcStatus`]; on failure a human-readable message is stored per
//! thread and can be read back with [`hflc_last_error`].
//!
//! Conventions:
//! - Handles created by `hflc_model_load` must be released with
//!   `hflc_model_free` exactly once. `hflc_model_free(NULL)` is a no-op.
//! - No function stores the pointers the caller passes in; inputs are
//!   copied before the call returns.
//! - Strings returned by this library are borrowed, NUL-terminated, and
//!   valid until the next call on the same thread. Do not free them.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use hflc::biped::PlanarPoint;
use hflc::hierarchy::{
    run_chain, ChainSignals, ControllerId, Hierarchy, LegSignals, CHAIN_MAX_ITER, CHAIN_TOL,
};
use hflc::Error;

/// Result of every fallible call in this API.
///
/// The numeric values match the exit codes of the `hflc` binary, so a
/// caller can reuse one error table for both.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HflcStatus {
    /// The call succeeded.
    Ok = 0,
    /// A bad argument: unknown controller, wrong input count, null
    /// pointer, or a malformed model file.
    InvalidArgument = 1,
    /// The file could not be read.
    Io = 2,
    /// Evaluation failed numerically (for example, no rule fires at the
    /// requested point).
    Numerical = 3,
    /// An unexpected internal failure; please report these.
    Internal = 4,
}

/// Opaque handle to a loaded controller hierarchy.
pub struct HflcModel {
    hierarchy: Hierarchy,
}

/// One leg's joint angles (radians) and ankle position (metres).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HflcLegState {
    pub beta: f64,
    pub gamma: f64,
    pub ankle_x: f64,
    pub ankle_y: f64,
}

/// Signals for both legs: the chain's warm start and its result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HflcChainState {
    pub left: HflcLegState,
    pub right: HflcLegState,
}

/// Outcome of one chain resolution.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HflcChainResult {
    pub signals: HflcChainState,
    /// Sweeps actually performed.
    pub iterations: usize,
    /// Whether the last sweep changed no signal by more than the
    /// tolerance.
    pub converged: bool,
    /// Largest absolute signal change during the final sweep.
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(status: HflcStatus, message: String) -> HflcStatus {
    set_error(message);
    status
}

fn status_of(e: &Error) -> HflcStatus {
    match e.exit_code() {
        1 => HflcStatus::InvalidArgument,
        2 => HflcStatus::Io,
        _ => HflcStatus::Numerical,
    }
}

fn fail_error(e: &Error) -> HflcStatus {
    fail(status_of(e), e.to_string())
}

/// Run `body`, converting panics into `Internal` instead of unwinding
/// across the C boundary.
fn guarded(body: impl FnOnce() -> HflcStatus) -> HflcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(HflcStatus::Internal, "internal panic".into()),
    }
}

/// # Safety
/// `name` must be a valid NUL-terminated string.
unsafe fn parse_controller(name: *const c_char) -> Result<ControllerId, HflcStatus> {
    if name.is_null() {
        return Err(fail(HflcStatus::InvalidArgument, "controller name is null".into()));
    }
    let name = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| fail(HflcStatus::InvalidArgument, "controller name is not UTF-8".into()))?;
    ControllerId::parse(name).map_err(|e| fail_error(&e))
}

fn leg_to_c(leg: &LegSignals) -> HflcLegState {
    HflcLegState { beta: leg.beta, gamma: leg.gamma, ankle_x: leg.ankle.x, ankle_y: leg.ankle.y }
}

fn leg_from_c(leg: &HflcLegState) -> LegSignals {
    LegSignals {
        beta: leg.beta,
        gamma: leg.gamma,
        ankle: PlanarPoint::new(leg.ankle_x, leg.ankle_y),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hflc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing this thread's most recent failure, or NULL if no
/// call on this thread has failed yet. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn hflc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.as_ptr(),
        None => ptr::null(),
    })
}

/// Load a model file saved by the `hflc` binary and return an opaque
/// handle through `out`.
///
/// On failure `*out` is left untouched. Missing or unreadable files
/// report `HFLC_STATUS_IO`; files that read but do not describe a valid
/// hierarchy report `HFLC_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn hflc_model_load(
    path: *const c_char,
    out: *mut *mut HflcModel,
) -> HflcStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            return fail(HflcStatus::InvalidArgument, "path and out must not be null".into());
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(p) => p,
            Err(_) => return fail(HflcStatus::InvalidArgument, "path is not UTF-8".into()),
        };
        let file = match hflc::persist::load_model(Path::new(path)) {
            Ok(file) => file,
            Err(e) => return fail(status_of(&e), format!("{path}: {e}")),
        };
        match file.into_hierarchy() {
            Ok(hierarchy) => {
                *out = Box::into_raw(Box::new(HflcModel { hierarchy }));
                HflcStatus::Ok
            }
            Err(e) => fail(status_of(&e), format!("{path}: {e}")),
        }
    })
}

/// Release a handle returned by [`hflc_model_load`]. NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hflc_model_free(model: *mut HflcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of inputs the named controller expects, through `out`.
///
/// # Safety
/// All pointers must be valid; `controller` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hflc_model_input_count(
    model: *const HflcModel,
    controller: *const c_char,
    out: *mut usize,
) -> HflcStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return fail(HflcStatus::InvalidArgument, "model handle is null".into());
        };
        if out.is_null() {
            return fail(HflcStatus::InvalidArgument, "out pointer is null".into());
        }
        let id = match parse_controller(controller) {
            Ok(id) => id,
            Err(status) => return status,
        };
        match model.hierarchy.node(id) {
            Ok(node) => {
                *out = node.spec.inputs.len();
                HflcStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Number of outputs (independently trained models) of the named
/// controller, through `out`.
///
/// # Safety
/// All pointers must be valid; `controller` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hflc_model_output_count(
    model: *const HflcModel,
    controller: *const c_char,
    out: *mut usize,
) -> HflcStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return fail(HflcStatus::InvalidArgument, "model handle is null".into());
        };
        if out.is_null() {
            return fail(HflcStatus::InvalidArgument, "out pointer is null".into());
        }
        let id = match parse_controller(controller) {
            Ok(id) => id,
            Err(status) => return status,
        };
        match model.hierarchy.node(id) {
            Ok(node) => {
                *out = node.models.len();
                HflcStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Evaluate one output of one controller at the given input vector and
/// write the result through `out`.
///
/// `inputs` must hold exactly the controller's input count (see
/// [`hflc_model_input_count`]), in the controller's own input order.
///
/// # Safety
/// All pointers must be valid; `inputs` must point to `n_inputs`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn hflc_model_eval(
    model: *const HflcModel,
    controller: *const c_char,
    output_index: usize,
    inputs: *const f64,
    n_inputs: usize,
    out: *mut f64,
) -> HflcStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return fail(HflcStatus::InvalidArgument, "model handle is null".into());
        };
        if out.is_null() {
            return fail(HflcStatus::InvalidArgument, "out pointer is null".into());
        }
        if inputs.is_null() && n_inputs > 0 {
            return fail(HflcStatus::InvalidArgument, "inputs pointer is null".into());
        }
        let id = match parse_controller(controller) {
            Ok(id) => id,
            Err(status) => return status,
        };
        let fis = match model.hierarchy.model(id, output_index) {
            Ok(fis) => fis,
            Err(e) => return fail_error(&e),
        };
        if n_inputs != fis.n_inputs() {
            return fail(
                HflcStatus::InvalidArgument,
                format!("{id} expects {} inputs, got {n_inputs}", fis.n_inputs()),
            );
        }
        let x = if n_inputs == 0 { &[] } else { slice::from_raw_parts(inputs, n_inputs) };
        match fis.eval(x) {
            Ok(y) => {
                *out = y;
                HflcStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Resolve the cyclic controller chain for one centre-of-mass reference
/// point, starting from `warm_start`, and write the outcome through
/// `out`.
///
/// Pass `max_iter = 0` and/or `tol <= 0` to use the library defaults
/// (10 sweeps, 1e-6).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hflc_model_run_chain(
    model: *const HflcModel,
    com_x: f64,
    com_y: f64,
    warm_start: *const HflcChainState,
    max_iter: usize,
    tol: f64,
    out: *mut HflcChainResult,
) -> HflcStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return fail(HflcStatus::InvalidArgument, "model handle is null".into());
        };
        let Some(warm) = warm_start.as_ref() else {
            return fail(HflcStatus::InvalidArgument, "warm_start pointer is null".into());
        };
        if out.is_null() {
            return fail(HflcStatus::InvalidArgument, "out pointer is null".into());
        }
        let warm = ChainSignals { left: leg_from_c(&warm.left), right: leg_from_c(&warm.right) };
        let max_iter = if max_iter == 0 { CHAIN_MAX_ITER } else { max_iter };
        let tol = if tol > 0.0 { tol } else { CHAIN_TOL };
        match run_chain(&model.hierarchy, PlanarPoint::new(com_x, com_y), &warm, max_iter, tol) {
            Ok(result) => {
                *out = HflcChainResult {
                    signals: HflcChainState {
                        left: leg_to_c(&result.signals.left),
                        right: leg_to_c(&result.signals.right),
                    },
                    iterations: result.iterations,
                    converged: result.converged,
                    residual: result.residual,
                };
                HflcStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}
