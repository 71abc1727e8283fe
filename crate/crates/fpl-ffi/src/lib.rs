//! C ABI for the spectral Fokker-Planck-Landau solver.
//!
//! The surface is deliberately small: build or load a collision tensor,
//! construct an initial state, march it in time, and read moments or
//! individual coefficients back out.  Everything heavier (CSV artifacts,
//! scenario sweeps, the validation suite) stays behind the `fpl` CLI.
//!
//! # Conventions
//!
//! - Handles (`FplTensor`, `FplState`) are opaque; create them through the
//!   `fpl_*_build/load/...` constructors and release them with the matching
//!   `fpl_*_free`.  Handles are not thread-safe; share them across threads
//!   only behind external synchronization.
//! - Every fallible call returns an [`FplStatus`].  On any status other than
//!   `FPL_STATUS_OK`, [`fpl_last_error_message`] returns a human-readable
//!   description; out-parameters are left untouched.
//! - The numeric status values mirror the CLI exit-code contract: 1 for
//!   numerical failures, 2 for usage errors, 3 for I/O and file-format
//!   problems.  Null-pointer misuse and caught panics get their own codes so
//!   they are never confused with domain failures.
//! - Panics never unwind across the boundary: each entry point catches them
//!   and reports `FPL_STATUS_PANIC`.
//!
//! The committed header `include/fpl.h` is generated from this file by
//! cbindgen (see `build.rs`); regenerate it by building the crate.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fpl_core::cli::exit_code;
use fpl_core::collision_kernel::{
    build_tensor, load_tensor, save_tensor, CollisionTensor, KernelParams,
};
use fpl_core::collision_models::{hybrid_rhs, quadratic_rhs, SpectralState};
use fpl_core::dynamics::evolve;
use fpl_core::hermite_burnett::build_conversion;
use fpl_core::index_space::MultiIndex;
use fpl_core::observables::moments;
use fpl_core::scenarios::Scenario;
use fpl_core::Error;

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FplStatus {
    /// The call succeeded.
    Ok = 0,
    /// A numerical failure: non-finite right-hand side or integrator blowup.
    Numerical = 1,
    /// Invalid arguments or configuration (bad γ, degrees, scenario id, ...).
    Usage = 2,
    /// An I/O failure or a malformed/mismatched coefficient cache.
    Io = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// An internal panic was caught at the boundary; state may be stale but
    /// memory is intact.
    Panic = 5,
}

/// Opaque handle to a precomputed collision tensor.
pub struct FplTensor(CollisionTensor);

/// Opaque handle to a spectral state (Hermite coefficients over I_M).
pub struct FplState(SpectralState);

/// Macroscopic moments of a state.  Entries whose defining coefficients lie
/// beyond the state's truncation are reported as NaN (velocity needs M ≥ 1,
/// temperature and stress M ≥ 2, heat flux M ≥ 3).
#[repr(C)]
pub struct FplMoments {
    /// Density ρ.
    pub rho: f64,
    /// Bulk velocity u.
    pub u: [f64; 3],
    /// Temperature θ.
    pub theta: f64,
    /// Stress tensor σ (symmetric, trace-free).
    pub sigma: [[f64; 3]; 3],
    /// Heat flux q.
    pub q: [f64; 3],
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: String = message
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
}

fn status_of(err: &Error) -> FplStatus {
    match exit_code(err) {
        1 => FplStatus::Numerical,
        3 => FplStatus::Io,
        _ => FplStatus::Usage,
    }
}

fn fail(err: &Error) -> FplStatus {
    set_last_error(&err.to_string());
    status_of(err)
}

/// Runs `body` with panics trapped at the boundary.
fn guarded(body: impl FnOnce() -> FplStatus) -> FplStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            set_last_error(&format!("internal panic: {text}"));
            FplStatus::Panic
        }
    }
}

fn null_argument(name: &str) -> FplStatus {
    set_last_error(&format!("required argument '{name}' is null"));
    FplStatus::NullArgument
}

/// Reads a C path argument; on `Err` the failure status is ready to return
/// and the error message is already set.
unsafe fn path_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a Path, FplStatus> {
    if ptr.is_null() {
        return Err(null_argument(name));
    }
    // SAFETY: non-null, and the caller contract requires a NUL-terminated
    // string valid for the duration of the call.
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_last_error(&format!("argument '{name}' is not valid UTF-8"));
            Err(FplStatus::Usage)
        }
    }
}

/// The library version as a static NUL-terminated string; never null, never
/// freed by the caller.
#[no_mangle]
pub extern "C" fn fpl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the most recent failure on the calling thread, as a
/// NUL-terminated string.  The pointer stays valid until the next failing
/// `fpl_*` call on the same thread; do not free it.  Returns an empty string
/// if no failure has occurred yet.
#[no_mangle]
pub extern "C" fn fpl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds the collision tensor for kernel exponent `gamma` (> -5), strength
/// `lambda` (> 0), and truncation degree `m0` (≥ 2), writing the new handle
/// to `*out`.  This is the expensive entry point (seconds at m0 = 9).
///
/// # Safety
///
/// `out` must be a valid pointer to writable storage for one pointer.  On
/// `FPL_STATUS_OK` the caller owns the handle and must release it with
/// [`fpl_tensor_free`]; on failure `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_build(
    gamma: f64,
    lambda: f64,
    m0: u32,
    out: *mut *mut FplTensor,
) -> FplStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let built = KernelParams::new(gamma, lambda).and_then(|params| {
            let conv = build_conversion(2 * m0 as usize + 1)?;
            build_tensor(&params, m0 as usize, &conv)
        });
        match built {
            Ok(tensor) => {
                // SAFETY: `out` was checked non-null and points to writable
                // storage per the caller contract.
                unsafe { *out = Box::into_raw(Box::new(FplTensor(tensor))) };
                FplStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a coefficient cache previously written by [`fpl_tensor_save`] or by
/// `fpl precompute`, writing the new handle to `*out`.  The header is
/// validated (magic, version, checksum) but no particular γ/Λ/M0 is
/// demanded; query the handle afterwards if the caller expects specific
/// parameters.
///
/// # Safety
///
/// `path` must be a valid NUL-terminated string and `out` a valid pointer to
/// writable storage for one pointer, both for the duration of the call.  On
/// `FPL_STATUS_OK` the caller owns the handle and must release it with
/// [`fpl_tensor_free`].
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_load(
    path: *const c_char,
    out: *mut *mut FplTensor,
) -> FplStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        // SAFETY: forwarded caller contract on `path`.
        let path = match unsafe { path_arg(path, "path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match load_tensor(path, None) {
            Ok(tensor) => {
                // SAFETY: `out` was checked non-null.
                unsafe { *out = Box::into_raw(Box::new(FplTensor(tensor))) };
                FplStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes `tensor` to `path` in the deterministic cache format.
///
/// # Safety
///
/// `tensor` must be a live handle from this library and `path` a valid
/// NUL-terminated string, both for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_save(
    tensor: *const FplTensor,
    path: *const c_char,
) -> FplStatus {
    guarded(|| {
        if tensor.is_null() {
            return null_argument("tensor");
        }
        // SAFETY: forwarded caller contract on `path`.
        let path = match unsafe { path_arg(path, "path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        // SAFETY: `tensor` is non-null and live per the caller contract.
        match save_tensor(&unsafe { &*tensor }.0, path) {
            Ok(()) => FplStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Releases a tensor handle.  Passing null is a no-op.
///
/// # Safety
///
/// `tensor` must be null or a handle obtained from this library that has not
/// already been freed; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_free(tensor: *mut FplTensor) {
    if !tensor.is_null() {
        // SAFETY: the caller guarantees this is an unfreed handle we created.
        drop(unsafe { Box::from_raw(tensor) });
    }
}

/// Kernel exponent γ of the tensor, or NaN if `tensor` is null.
///
/// # Safety
///
/// `tensor` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_gamma(tensor: *const FplTensor) -> f64 {
    if tensor.is_null() {
        return f64::NAN;
    }
    // SAFETY: non-null and live per the caller contract.
    unsafe { &*tensor }.0.params().gamma()
}

/// Kernel strength Λ of the tensor, or NaN if `tensor` is null.
///
/// # Safety
///
/// `tensor` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_lambda(tensor: *const FplTensor) -> f64 {
    if tensor.is_null() {
        return f64::NAN;
    }
    // SAFETY: non-null and live per the caller contract.
    unsafe { &*tensor }.0.params().lambda()
}

/// Truncation degree M0 of the tensor, or 0 if `tensor` is null.
///
/// # Safety
///
/// `tensor` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_m0(tensor: *const FplTensor) -> u32 {
    if tensor.is_null() {
        return 0;
    }
    // SAFETY: non-null and live per the caller contract.
    unsafe { &*tensor }.0.m0() as u32
}

/// Number of stored nonzero entries, or 0 if `tensor` is null.
///
/// # Safety
///
/// `tensor` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_tensor_entry_count(tensor: *const FplTensor) -> u64 {
    if tensor.is_null() {
        return 0;
    }
    // SAFETY: non-null and live per the caller contract.
    unsafe { &*tensor }.0.entry_count() as u64
}

/// Creates the global Maxwellian state truncated at degree `m` (≥ 2),
/// writing the new handle to `*out`.
///
/// # Safety
///
/// `out` must be a valid pointer to writable storage for one pointer.  On
/// `FPL_STATUS_OK` the caller owns the handle and must release it with
/// [`fpl_state_free`].
#[no_mangle]
pub unsafe extern "C" fn fpl_state_maxwellian(m: u32, out: *mut *mut FplState) -> FplStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        if m < 2 {
            set_last_error(&format!("state degree must be at least 2, got {m}"));
            return FplStatus::Usage;
        }
        // SAFETY: `out` was checked non-null.
        unsafe { *out = Box::into_raw(Box::new(FplState(SpectralState::maxwellian(m as usize)))) };
        FplStatus::Ok
    })
}

/// Projects a named benchmark initial condition ("bkw", "bigaussian", or
/// "rosenbluth") onto the basis truncated at degree `m`, writing the new
/// handle to `*out`.
///
/// # Safety
///
/// `scenario` must be a valid NUL-terminated string and `out` a valid
/// pointer to writable storage for one pointer.  On `FPL_STATUS_OK` the
/// caller owns the handle and must release it with [`fpl_state_free`].
#[no_mangle]
pub unsafe extern "C" fn fpl_state_from_scenario(
    scenario: *const c_char,
    m: u32,
    out: *mut *mut FplState,
) -> FplStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        if scenario.is_null() {
            return null_argument("scenario");
        }
        // SAFETY: non-null, NUL-terminated per the caller contract.
        let id = match unsafe { CStr::from_ptr(scenario) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_last_error("argument 'scenario' is not valid UTF-8");
                return FplStatus::Usage;
            }
        };
        let built = Scenario::from_id(id).and_then(|sc| sc.initial_state(m as usize));
        match built {
            Ok((state, _report)) => {
                // SAFETY: `out` was checked non-null.
                unsafe { *out = Box::into_raw(Box::new(FplState(state))) };
                FplStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a state handle.  Passing null is a no-op.
///
/// # Safety
///
/// `state` must be null or a handle obtained from this library that has not
/// already been freed; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fpl_state_free(state: *mut FplState) {
    if !state.is_null() {
        // SAFETY: the caller guarantees this is an unfreed handle we created.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Truncation degree M of the state, or 0 if `state` is null.
///
/// # Safety
///
/// `state` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_state_degree(state: *const FplState) -> u32 {
    if state.is_null() {
        return 0;
    }
    // SAFETY: non-null and live per the caller contract.
    unsafe { &*state }.0.degree() as u32
}

/// Simulation time carried by the state, or NaN if `state` is null.
///
/// # Safety
///
/// `state` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_state_time(state: *const FplState) -> f64 {
    if state.is_null() {
        return f64::NAN;
    }
    // SAFETY: non-null and live per the caller contract.
    unsafe { &*state }.0.time()
}

/// Reads the coefficient f_α at the multi-index α = (a1, a2, a3) into
/// `*value`.  Fails with a usage status if |α| exceeds the truncation.
///
/// # Safety
///
/// `state` must be a live handle from this library and `value` a valid
/// pointer to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn fpl_state_coeff(
    state: *const FplState,
    a1: u32,
    a2: u32,
    a3: u32,
    value: *mut f64,
) -> FplStatus {
    guarded(|| {
        if state.is_null() {
            return null_argument("state");
        }
        if value.is_null() {
            return null_argument("value");
        }
        let alpha = MultiIndex::new(a1 as usize, a2 as usize, a3 as usize);
        // SAFETY: `state` is non-null and live per the caller contract.
        match unsafe { &*state }.0.coeff(alpha) {
            Ok(v) => {
                // SAFETY: `value` was checked non-null.
                unsafe { *value = v };
                FplStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Overwrites the coefficient f_α at α = (a1, a2, a3).  Fails with a usage
/// status if |α| exceeds the truncation or `value` is not finite.
///
/// # Safety
///
/// `state` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fpl_state_set_coeff(
    state: *mut FplState,
    a1: u32,
    a2: u32,
    a3: u32,
    value: f64,
) -> FplStatus {
    guarded(|| {
        if state.is_null() {
            return null_argument("state");
        }
        let alpha = MultiIndex::new(a1 as usize, a2 as usize, a3 as usize);
        // SAFETY: `state` is non-null, live, and exclusively borrowed per
        // the caller contract (handles are not thread-safe).
        match unsafe { &mut *state }.0.set_coeff(alpha, value) {
            Ok(()) => FplStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Computes the macroscopic moments of `state` into `*out`; entries beyond
/// the truncation come back as NaN (see [`FplMoments`]).
///
/// # Safety
///
/// `state` must be a live handle from this library and `out` a valid pointer
/// to writable storage for one `FplMoments`.
#[no_mangle]
pub unsafe extern "C" fn fpl_moments(state: *const FplState, out: *mut FplMoments) -> FplStatus {
    guarded(|| {
        if state.is_null() {
            return null_argument("state");
        }
        if out.is_null() {
            return null_argument("out");
        }
        // SAFETY: `state` is non-null and live per the caller contract.
        let m = moments(&unsafe { &*state }.0);
        let filled = FplMoments {
            rho: m.rho,
            u: m.u.unwrap_or([f64::NAN; 3]),
            theta: m.theta.unwrap_or(f64::NAN),
            sigma: m.sigma.unwrap_or([[f64::NAN; 3]; 3]),
            q: m.q.unwrap_or([f64::NAN; 3]),
        };
        // SAFETY: `out` was checked non-null.
        unsafe { *out = filled };
        FplStatus::Ok
    })
}

/// Advances `state` in place by `t_end` time units from its current time
/// with fixed RK4 steps of size `dt` (`round(t_end/dt)` steps).  The
/// collision model follows the degrees:
/// the full quadratic operator when the state's M equals the tensor's M0,
/// the hybrid quadratic/linear split when M exceeds M0; M below M0 is a
/// usage error.  On a numerical failure the state keeps its pre-call value.
///
/// # Safety
///
/// `tensor` and `state` must be live handles from this library; `state` must
/// not be aliased for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn fpl_evolve(
    tensor: *const FplTensor,
    state: *mut FplState,
    dt: f64,
    t_end: f64,
) -> FplStatus {
    guarded(|| {
        if tensor.is_null() {
            return null_argument("tensor");
        }
        if state.is_null() {
            return null_argument("state");
        }
        // SAFETY: both handles are non-null and live per the caller
        // contract; `state` is exclusively borrowed.
        let tensor = &unsafe { &*tensor }.0;
        let state = &mut unsafe { &mut *state }.0;
        let (m, m0) = (state.degree(), tensor.m0());
        if m < m0 {
            set_last_error(&format!(
                "state degree M = {m} is below the tensor truncation M0 = {m0}"
            ));
            return FplStatus::Usage;
        }
        let run = if m == m0 {
            evolve(state, dt, t_end, &[], |s| quadratic_rhs(tensor, s))
        } else {
            evolve(state, dt, t_end, &[], |s| hybrid_rhs(tensor, s))
        };
        match run {
            Ok(trajectory) => {
                *state = trajectory.final_state;
                FplStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_mirror_the_cli_contract() {
        assert_eq!(
            status_of(&Error::Blowup { step: 1, time: 0.0 }),
            FplStatus::Numerical
        );
        assert_eq!(status_of(&Error::Config("x".into())), FplStatus::Usage);
        assert_eq!(
            status_of(&Error::Io(std::io::Error::other("x"))),
            FplStatus::Io
        );
        assert_eq!(status_of(&Error::Format("x".into())), FplStatus::Io);
    }

    #[test]
    fn last_error_strips_interior_nul_bytes() {
        set_last_error("a\0b");
        LAST_ERROR.with(|slot| {
            assert_eq!(slot.borrow().to_str().unwrap(), "a b");
        });
    }
}
