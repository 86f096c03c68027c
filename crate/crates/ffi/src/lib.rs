//! C interface to attractorlab.
//!
//! Objects are opaque handles created by `al_*_new`-style calls and released
//! with the matching `al_*_free`. Every fallible call returns an `AL_*`
//! status code; on failure `al_last_error` gives the message for the calling
//! thread. Output pointers are written only on success.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use attractorlab::cylinder::{integrate_orbit, occupancy, CylinderFlow, OrbitSample};
use attractorlab::lab::{run_scenario, RunManifest, ScenarioConfig};
use attractorlab::maps::{poincare_step, PolycycleModel, SaddleNodeParams, SaddleParams};
use attractorlab::timelines::{generate_timeline, EventTimeline};
use attractorlab::LabError;

pub const AL_OK: i32 = 0;
pub const AL_ERR_NULL: i32 = 1;
pub const AL_ERR_DOMAIN: i32 = 2;
pub const AL_ERR_INVARIANT: i32 = 3;
pub const AL_ERR_RANGE: i32 = 4;
pub const AL_ERR_NUMERIC: i32 = 5;
pub const AL_ERR_CONFIG: i32 = 6;
pub const AL_ERR_IO: i32 = 7;
pub const AL_ERR_UTF8: i32 = 8;
pub const AL_ERR_PANIC: i32 = 9;

pub struct AlModel(PolycycleModel);
pub struct AlTimeline(EventTimeline);
pub struct AlOrbit(OrbitSample);
pub struct AlManifest(RunManifest);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code(e: &LabError) -> i32 {
    match e {
        LabError::Domain(_) | LabError::ChartExit { .. } | LabError::OutOfArc { .. } | LabError::StripOverlap(_) => {
            AL_ERR_DOMAIN
        }
        LabError::Invariant(_)
        | LabError::Contraction { .. }
        | LabError::WrongModel { .. }
        | LabError::Interleaving(_)
        | LabError::Hierarchy(_) => AL_ERR_INVARIANT,
        LabError::Range(_) | LabError::Horizon(_) | LabError::InsufficientEvents { .. } => AL_ERR_RANGE,
        LabError::StepTooLarge(_) | LabError::StepFailure { .. } => AL_ERR_NUMERIC,
        LabError::Config(_) => AL_ERR_CONFIG,
        LabError::Io(_) => AL_ERR_IO,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AL_OK,
        Ok(Err((c, m))) => {
            set_error(m);
            c
        }
        Err(_) => {
            set_error("internal panic".into());
            AL_ERR_PANIC
        }
    }
}

fn lab<T>(r: attractorlab::Result<T>) -> Result<T, (i32, String)> {
    r.map_err(|e| (code(&e), e.to_string()))
}

fn null(what: &str) -> (i32, String) {
    (AL_ERR_NULL, format!("{what} is null"))
}

unsafe fn out<T>(p: *mut T, v: T) {
    p.write(v)
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (i32, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copies `s` NUL-terminated into `buf` (truncating) and returns the full
/// length without the NUL, so callers can size a second attempt.
unsafe fn copy_str(s: &str, buf: *mut c_char, len: usize) -> usize {
    if !buf.is_null() && len > 0 {
        let n = s.len().min(len - 1);
        std::ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, n);
        *buf.add(n) = 0;
    }
    s.len()
}

/// Copies this thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns its full length.
#[no_mangle]
pub unsafe extern "C" fn al_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_str(&e.borrow(), buf, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn new_model(out_model: *mut *mut AlModel, f: impl FnOnce() -> attractorlab::Result<PolycycleModel>) -> i32 {
    guard(|| {
        if out_model.is_null() {
            return Err(null("out"));
        }
        let m = lab(f())?;
        out(out_model, Box::into_raw(Box::new(AlModel(m))));
        Ok(())
    })
}

/// Biangle with saddles `(mu_a, lambda_a)` and `(mu_b, lambda_b)`, monodromy `c`.
#[no_mangle]
pub unsafe extern "C" fn al_model_biangle(
    mu_a: f64,
    lambda_a: f64,
    mu_b: f64,
    lambda_b: f64,
    c: f64,
    out_model: *mut *mut AlModel,
) -> i32 {
    new_model(out_model, || {
        PolycycleModel::biangle(SaddleParams::new(mu_a, lambda_a, c)?, SaddleParams::new(mu_b, lambda_b, c)?)
    })
}

/// Modified Bowen example: saddle-node `(a, b)` and saddle `(mu, lambda, c)`.
#[no_mangle]
pub unsafe extern "C" fn al_model_mbe(
    a: f64,
    b: f64,
    mu: f64,
    lambda: f64,
    c: f64,
    out_model: *mut *mut AlModel,
) -> i32 {
    new_model(out_model, || {
        PolycycleModel::modified_bowen(SaddleNodeParams::new(a, b)?, SaddleParams::new(mu, lambda, c)?)
    })
}

/// Separatrix loop with transit constant `k_transit`.
#[no_mangle]
pub unsafe extern "C" fn al_model_loop(
    mu: f64,
    lambda: f64,
    c: f64,
    k_transit: f64,
    out_model: *mut *mut AlModel,
) -> i32 {
    new_model(out_model, || PolycycleModel::loop_model(SaddleParams::new(mu, lambda, c)?, k_transit))
}

#[no_mangle]
pub unsafe extern "C" fn al_model_free(m: *mut AlModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// One return-map step: next coordinate and the turn's time (may be
/// infinite for late MBE turns).
#[no_mangle]
pub unsafe extern "C" fn al_poincare_step(m: *const AlModel, x: f64, next: *mut f64, turn_time: *mut f64) -> i32 {
    guard(|| {
        let m = handle(m, "model")?;
        if next.is_null() || turn_time.is_null() {
            return Err(null("output"));
        }
        let s = lab(poincare_step(x, &m.0))?;
        out(next, s.next);
        out(turn_time, s.turn_time);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn al_timeline_generate(
    m: *const AlModel,
    z0: f64,
    turns: usize,
    out_tl: *mut *mut AlTimeline,
) -> i32 {
    guard(|| {
        let m = handle(m, "model")?;
        if out_tl.is_null() {
            return Err(null("out"));
        }
        let t = lab(generate_timeline(&m.0, z0, turns))?;
        out(out_tl, Box::into_raw(Box::new(AlTimeline(t))));
        Ok(())
    })
}

/// Number of recorded turns, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn al_timeline_len(t: *const AlTimeline) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// `ln T_{k,A}`; stays finite one tower level beyond `T_{k,A}` itself.
#[no_mangle]
pub unsafe extern "C" fn al_timeline_ln_t_a(t: *const AlTimeline, k: usize, value: *mut f64) -> i32 {
    guard(|| {
        let t = handle(t, "timeline")?;
        if value.is_null() {
            return Err(null("value"));
        }
        let v = t.0.t_a(k).ok_or_else(|| (AL_ERR_RANGE, format!("arrival {k} not recorded")))?;
        out(value, v.ln_f64());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn al_timeline_free(t: *mut AlTimeline) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Orbit of the default cylinder flow from `(theta0, xi0)` down to `xi_end`.
#[no_mangle]
pub unsafe extern "C" fn al_cylinder_orbit(
    theta0: f64,
    xi0: f64,
    xi_end: f64,
    tol: f64,
    out_orbit: *mut *mut AlOrbit,
) -> i32 {
    guard(|| {
        if out_orbit.is_null() {
            return Err(null("out"));
        }
        let o = lab(integrate_orbit(theta0, xi0, xi_end, &CylinderFlow::default_geometry(), tol))?;
        out(out_orbit, Box::into_raw(Box::new(AlOrbit(o))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn al_orbit_theta_at(o: *const AlOrbit, xi: f64, theta: *mut f64) -> i32 {
    guard(|| {
        let o = handle(o, "orbit")?;
        if theta.is_null() {
            return Err(null("theta"));
        }
        out(theta, lab(o.0.theta_at(xi))?);
        Ok(())
    })
}

/// Final strip fractions `(χ_l, χ_r)` with strip half-width `eps`.
#[no_mangle]
pub unsafe extern "C" fn al_orbit_occupancy(o: *const AlOrbit, eps: f64, chi_l: *mut f64, chi_r: *mut f64) -> i32 {
    guard(|| {
        let o = handle(o, "orbit")?;
        if chi_l.is_null() || chi_r.is_null() {
            return Err(null("output"));
        }
        let (l, r) = lab(occupancy(&o.0, eps))?.final_chi();
        out(chi_l, l);
        out(chi_r, r);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn al_orbit_free(o: *mut AlOrbit) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Runs the scenario in the TOML text `config` and returns its manifest.
/// A run that stops on a module error still succeeds here; see
/// `al_manifest_passed`.
#[no_mangle]
pub unsafe extern "C" fn al_run_scenario(config: *const c_char, out_manifest: *mut *mut AlManifest) -> i32 {
    guard(|| {
        if config.is_null() || out_manifest.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(config).to_str().map_err(|e| (AL_ERR_UTF8, e.to_string()))?;
        let c = lab(ScenarioConfig::parse(text, &[]))?;
        let m = lab(run_scenario(&c))?;
        out(out_manifest, Box::into_raw(Box::new(AlManifest(m))));
        Ok(())
    })
}

/// 1 if every verdict passed and no error was recorded, 0 otherwise.
#[no_mangle]
pub unsafe extern "C" fn al_manifest_passed(m: *const AlManifest) -> i32 {
    m.as_ref().map_or(0, |m| i32::from(m.0.passed()))
}

/// Copies the manifest file path into `buf` like `al_last_error`; returns
/// its full length, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn al_manifest_path(m: *const AlManifest, buf: *mut c_char, len: usize) -> usize {
    match m.as_ref() {
        Some(m) => copy_str(&m.0.manifest_path().to_string_lossy(), buf, len),
        None => 0,
    }
}

#[no_mangle]
pub unsafe extern "C" fn al_manifest_free(m: *mut AlManifest) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
