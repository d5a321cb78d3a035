//! C ABI for `asdflow`.
//!
//! Objects are opaque handles created by `asd_*_new`-style constructors and
//! released with the matching `*_free`. Every fallible function returns an
//! [`AsdStatus`]; on failure, [`asd_last_error_message`] describes the error.
//! Panics never cross the boundary; they are reported as `ASD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use asdflow::analysis::cylinder_spectrum;
use asdflow::dynamics::{simulate, Scheme, SimConfig, Termination, TrajectoryRecord};
use asdflow::equilibria::unduloid_profile;
use asdflow::geometry::g_divergence;
use asdflow::{Error, PeriodicProfile, TorusGrid};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsdStatus {
    Ok = 0,
    Argument = 1,
    Domain = 2,
    Unsupported = 3,
    Classification = 4,
    NoLift = 5,
    Numeric = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Why a simulation stopped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsdTermination {
    ReachedTEnd = 0,
    PinchDetected = 1,
    Diverged = 2,
    StepUnderflow = 3,
}

/// Scalar diagnostic columns of a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsdColumn {
    Time = 0,
    Volume = 1,
    Area = 2,
    MinR = 3,
    MaxR = 4,
}

/// Time-integration settings; obtain defaults from [`asd_sim_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsdSimConfig {
    pub dt0: f64,
    pub t_end: f64,
    pub stab_margin: f64,
    pub adapt_tol: f64,
    pub pinch_frac: f64,
    pub snapshot_every: usize,
    pub k_track: usize,
    /// 0: IMEX Euler, 1: IMEX trapezoid.
    pub scheme: u32,
}

/// Opaque periodic profile.
pub struct AsdProfile(PeriodicProfile);

/// Opaque simulation result.
pub struct AsdTrajectory(TrajectoryRecord);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> AsdStatus {
    match err {
        Error::Argument(_) | Error::Parse(_) => AsdStatus::Argument,
        Error::Domain { .. } => AsdStatus::Domain,
        Error::UnsupportedParameter(_) => AsdStatus::Unsupported,
        Error::Classification { .. } => AsdStatus::Classification,
        Error::NoLift { .. } => AsdStatus::NoLift,
        Error::Numeric(_) => AsdStatus::Numeric,
        Error::Io(_) => AsdStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), AsdStatus>) -> AsdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AsdStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            AsdStatus::Panic
        }
    }
}

fn fail(err: Error) -> AsdStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> AsdStatus {
    set_error(format!("{what} is null"));
    AsdStatus::NullPointer
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, AsdStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), AsdStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_to(src: &[f64], out: *mut f64, len: usize) -> Result<(), AsdStatus> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, need {}", src.len()));
        return Err(AsdStatus::Argument);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message for the last failed call on this thread. Empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn asd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a profile from `n` samples on the uniform grid of `[-π, π)`.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asd_profile_new(values: *const f64, n: usize, out: *mut *mut AsdProfile) -> AsdStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let data = std::slice::from_raw_parts(values, n).to_vec();
        let grid = TorusGrid::new(n).map_err(fail)?;
        let p = PeriodicProfile::new(grid, data).map_err(fail)?;
        write_out(out, AsdProfile(p))
    })
}

/// Releases a profile. Null is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asd_profile_free(p: *mut AsdProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of grid nodes, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live profile handle.
#[no_mangle]
pub unsafe extern "C" fn asd_profile_len(p: *const AsdProfile) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Copies the samples into `out`, which must hold at least `len` doubles.
///
/// # Safety
/// `p` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn asd_profile_values(p: *const AsdProfile, out: *mut f64, len: usize) -> AsdStatus {
    guard(|| copy_to(handle(p, "profile")?.0.values(), out, len))
}

/// Even `2π/k`-periodic unduloid with shape parameter `b` on an `n`-node grid.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asd_unduloid_profile(b: f64, k: u32, n: usize, out: *mut *mut AsdProfile) -> AsdStatus {
    guard(|| {
        let grid = TorusGrid::new(n).map_err(fail)?;
        let p = unduloid_profile(b, k, grid).map_err(fail)?;
        write_out(out, AsdProfile(p))
    })
}

/// Evaluates the surface diffusion operator `G(r)` into a new profile.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn asd_g(p: *const AsdProfile, out: *mut *mut AsdProfile) -> AsdStatus {
    guard(|| {
        let g = g_divergence(&handle(p, "profile")?.0).map_err(fail)?;
        write_out(out, AsdProfile(g))
    })
}

/// Writes the growth rates `k²(1/radius² - k²)` for `k = 1..=k_max` into `out`.
///
/// # Safety
/// `out` must be writable for `k_max` doubles.
#[no_mangle]
pub unsafe extern "C" fn asd_cylinder_spectrum(radius: f64, k_max: usize, out: *mut f64) -> AsdStatus {
    guard(|| {
        let report = cylinder_spectrum(radius, k_max, true).map_err(fail)?;
        let mus: Vec<f64> = report.entries.iter().map(|e| e.mu_re).collect();
        copy_to(&mus, out, k_max)
    })
}

#[no_mangle]
pub extern "C" fn asd_sim_config_default() -> AsdSimConfig {
    let d = SimConfig::default();
    AsdSimConfig {
        dt0: d.dt0,
        t_end: d.t_end,
        stab_margin: d.stab_margin,
        adapt_tol: d.adapt_tol,
        pinch_frac: d.pinch_frac,
        snapshot_every: d.snapshot_every,
        k_track: d.k_track,
        scheme: 0,
    }
}

/// Integrates the flow from `p`. Pinch-off and divergence are reported
/// through [`asd_trajectory_termination`], not as errors.
///
/// # Safety
/// `p` and `cfg` must be valid pointers and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn asd_simulate(
    p: *const AsdProfile,
    cfg: *const AsdSimConfig,
    out: *mut *mut AsdTrajectory,
) -> AsdStatus {
    guard(|| {
        let r0 = &handle(p, "profile")?.0;
        let c = handle(cfg, "config")?;
        let scheme = match c.scheme {
            0 => Scheme::ImexEuler,
            1 => Scheme::ImexTrapezoid,
            other => return Err(fail(Error::Argument(format!("unknown scheme {other}")))),
        };
        let cfg = SimConfig {
            n: r0.len(),
            dt0: c.dt0,
            t_end: c.t_end,
            stab_margin: c.stab_margin,
            adapt_tol: c.adapt_tol,
            pinch_frac: c.pinch_frac,
            snapshot_every: c.snapshot_every,
            k_track: c.k_track,
            scheme,
        };
        let traj = simulate(r0, &cfg).map_err(fail)?;
        write_out(out, AsdTrajectory(traj))
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `t` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asd_trajectory_free(t: *mut AsdTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of recorded samples, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn asd_trajectory_len(t: *const AsdTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn asd_trajectory_termination(t: *const AsdTrajectory, out: *mut AsdTermination) -> AsdStatus {
    guard(|| {
        let t = handle(t, "trajectory")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = match t.0.termination {
            Termination::ReachedTEnd => AsdTermination::ReachedTEnd,
            Termination::PinchDetected => AsdTermination::PinchDetected,
            Termination::Diverged => AsdTermination::Diverged,
            Termination::StepUnderflow => AsdTermination::StepUnderflow,
        };
        Ok(())
    })
}

/// Copies one diagnostic column (length [`asd_trajectory_len`]) into `out`.
///
/// # Safety
/// `t` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn asd_trajectory_column(
    t: *const AsdTrajectory,
    column: AsdColumn,
    out: *mut f64,
    len: usize,
) -> AsdStatus {
    guard(|| {
        let t = &handle(t, "trajectory")?.0;
        let src = match column {
            AsdColumn::Time => &t.times,
            AsdColumn::Volume => &t.volume,
            AsdColumn::Area => &t.area,
            AsdColumn::MinR => &t.min_r,
            AsdColumn::MaxR => &t.max_r,
        };
        copy_to(src, out, len)
    })
}

/// Copies `|ĥ(k)|` over time for a tracked mode `1 <= k <= k_track`.
///
/// # Safety
/// `t` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn asd_trajectory_mode_amplitude(
    t: *const AsdTrajectory,
    k: usize,
    out: *mut f64,
    len: usize,
) -> AsdStatus {
    guard(|| {
        let t = &handle(t, "trajectory")?.0;
        let amps = k
            .checked_sub(1)
            .and_then(|i| t.mode_amps.get(i))
            .ok_or_else(|| fail(Error::Argument(format!("mode {k} is not tracked"))))?;
        copy_to(amps, out, len)
    })
}

/// Copies the last state of the trajectory into a new profile.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn asd_trajectory_final_profile(t: *const AsdTrajectory, out: *mut *mut AsdProfile) -> AsdStatus {
    guard(|| {
        let t = &handle(t, "trajectory")?.0;
        let last = t
            .final_profile()
            .ok_or_else(|| fail(Error::Argument("trajectory has no snapshots".into())))?;
        write_out(out, AsdProfile(last.clone()))
    })
}
