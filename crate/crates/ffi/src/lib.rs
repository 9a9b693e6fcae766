//! C interface to surface-lab.
//!
//! Objects cross the boundary as opaque handles. `sl_calibration_default`,
//! `sl_calibration_load` and `sl_memory_run` create them and the matching
//! `sl_*_free` releases them.
//! Every fallible function returns an [`sl_status`]; on failure a message is
//! available from [`sl_last_error`] on the same thread until the next call.
//! Panics never cross the boundary, they become `SL_INTERNAL`.

#![allow(non_camel_case_types)]
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use surface_lab::analysis::{
    fit_logical_error, logical_fidelity, logical_lifetime, postselect, run_memory_point, ErrorBar, MemoryConfig,
    MemoryPoint, PostSelectScheme,
};
use surface_lab::detection::def_curve;
use surface_lab::noise::{CalibrationTable, NoiseOptions};
use surface_lab::sim::Engine;
use surface_lab::surface_code::{cycle_duration, Basis, CodeLayout};
use surface_lab::xeb::{run_xeb, XebConfig};
use surface_lab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum sl_status {
    SL_OK = 0,
    SL_NULL_POINTER = 1,
    SL_INVALID_ARGUMENT = 2,
    SL_CALIBRATION = 3,
    SL_DATA = 4,
    SL_IO = 5,
    SL_RESOURCE = 6,
    SL_INTERNAL = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum sl_basis {
    SL_BASIS_Z = 0,
    SL_BASIS_X = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum sl_scheme {
    SL_SCHEME_NONE = 0,
    SL_SCHEME_DATA = 1,
    SL_SCHEME_ANCILLA = 2,
    SL_SCHEME_BOTH = 3,
}

/// Calibration table (per-qubit coherence, readout and gate errors).
pub struct SlCalibration(CalibrationTable);

/// One simulated, detected and decoded memory experiment.
pub struct SlMemoryRun {
    point: MemoryPoint,
    def: Vec<Vec<f64>>,
}

/// Fitted logical decay.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct sl_fit {
    pub epsilon: f64,
    pub k0: f64,
    pub residual: f64,
}

/// Fraction of correct logical outcomes among the shots a scheme keeps.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct sl_fidelity {
    pub fidelity: f64,
    pub std_error: f64,
    pub retained: u64,
    pub total: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct sl_xeb_result {
    pub fidelity: f64,
    pub std_error: f64,
    /// NaN for noiseless runs.
    pub predicted: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn status_of(e: &Error) -> sl_status {
    match e {
        Error::Calibration { .. } | Error::UnknownPair(..) => sl_status::SL_CALIBRATION,
        Error::Io { .. } => sl_status::SL_IO,
        Error::Resource(_) => sl_status::SL_RESOURCE,
        e if e.is_data_error() => sl_status::SL_DATA,
        _ => sl_status::SL_INVALID_ARGUMENT,
    }
}

/// Runs `f`, turning errors and panics into a status code plus message.
fn guard(f: impl FnOnce() -> Result<(), sl_status>) -> sl_status {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => sl_status::SL_OK,
        Ok(Err(s)) => s,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            sl_status::SL_INTERNAL
        }
    }
}

fn fail(e: Error) -> sl_status {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> sl_status {
    set_error(&format!("{what} is null"));
    sl_status::SL_NULL_POINTER
}

fn invalid(msg: &str) -> sl_status {
    set_error(msg);
    sl_status::SL_INVALID_ARGUMENT
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, sl_status> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, sl_status> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `sl_` call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The built-in calibration table.
#[no_mangle]
pub unsafe extern "C" fn sl_calibration_default(out: *mut *mut SlCalibration) -> sl_status {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(SlCalibration(CalibrationTable::default_table())));
        Ok(())
    })
}

/// Loads a calibration JSON file.
#[no_mangle]
pub unsafe extern "C" fn sl_calibration_load(path: *const c_char, out: *mut *mut SlCalibration) -> sl_status {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let table = CalibrationTable::load(Path::new(path)).map_err(fail)?;
        *out = Box::into_raw(Box::new(SlCalibration(table)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sl_calibration_free(cal: *mut SlCalibration) {
    if !cal.is_null() {
        drop(Box::from_raw(cal));
    }
}

/// Duration of one error-correction cycle in microseconds.
#[no_mangle]
pub unsafe extern "C" fn sl_cycle_duration_us(cal: *const SlCalibration, out: *mut f64) -> sl_status {
    guard(|| {
        let cal = in_ref(cal, "cal")?;
        *out_ptr(out, "out")? = cycle_duration(&cal.0.durations_ns);
        Ok(())
    })
}

/// Simulates `shots` runs of a distance-`distance` memory for `cycles`
/// cycles, extracts detection events and decodes them.
#[no_mangle]
pub unsafe extern "C" fn sl_memory_run(
    cal: *const SlCalibration,
    distance: u32,
    basis: sl_basis,
    cycles: u32,
    shots: u64,
    seed: u64,
    noisy: bool,
    out: *mut *mut SlMemoryRun,
) -> sl_status {
    guard(|| {
        let cal = in_ref(cal, "cal")?;
        let out = out_ptr(out, "out")?;
        if cycles == 0 || shots == 0 {
            return Err(invalid("cycles and shots must be positive"));
        }
        let cfg = MemoryConfig {
            distance: distance as usize,
            basis: match basis {
                sl_basis::SL_BASIS_Z => Basis::Z,
                sl_basis::SL_BASIS_X => Basis::X,
            },
            cycles: vec![cycles as usize],
            shots: shots as usize,
            seed,
            engine: Engine::Frame,
            noise: noisy.then(NoiseOptions::default),
            error_bar: ErrorBar::Wald,
        };
        let point = run_memory_point(&cfg, &cal.0, cycles as usize).map_err(fail)?;
        let def = def_curve(&point.detections).map_err(fail)?.fractions;
        *out = Box::into_raw(Box::new(SlMemoryRun { point, def }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sl_memory_free(run: *mut SlMemoryRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of detectors (ancillas times rounds, including the final round).
#[no_mangle]
pub unsafe extern "C" fn sl_memory_detectors(run: *const SlMemoryRun, out: *mut u64) -> sl_status {
    guard(|| {
        let run = in_ref(run, "run")?;
        *out_ptr(out, "out")? = run.point.detections.spec().n_detectors() as u64;
        Ok(())
    })
}

/// Total number of detection events over all shots.
#[no_mangle]
pub unsafe extern "C" fn sl_memory_event_count(run: *const SlMemoryRun, out: *mut u64) -> sl_status {
    guard(|| {
        let m = &in_ref(run, "run")?.point.detections;
        *out_ptr(out, "out")? = (0..m.shots()).map(|s| m.fired(s).len() as u64).sum();
        Ok(())
    })
}

/// Detection-event fraction of `ancilla` (index among the checked
/// stabilizers) at `round` (1-based).
#[no_mangle]
pub unsafe extern "C" fn sl_memory_def(run: *const SlMemoryRun, ancilla: u32, round: u32, out: *mut f64) -> sl_status {
    guard(|| {
        let run = in_ref(run, "run")?;
        let v = run
            .def
            .get(ancilla as usize)
            .and_then(|r| r.get((round as usize).wrapping_sub(1)))
            .ok_or_else(|| invalid(&format!("no detector for ancilla {ancilla}, round {round}")))?;
        *out_ptr(out, "out")? = *v;
        Ok(())
    })
}

/// Logical fidelity after post-selection with `scheme`, raw or decoded.
#[no_mangle]
pub unsafe extern "C" fn sl_memory_fidelity(
    run: *const SlMemoryRun,
    scheme: sl_scheme,
    decoded: bool,
    out: *mut sl_fidelity,
) -> sl_status {
    guard(|| {
        let p = &in_ref(run, "run")?.point;
        let out = out_ptr(out, "out")?;
        let scheme = match scheme {
            sl_scheme::SL_SCHEME_NONE => PostSelectScheme::None,
            sl_scheme::SL_SCHEME_DATA => PostSelectScheme::Data,
            sl_scheme::SL_SCHEME_ANCILLA => PostSelectScheme::Ancilla,
            sl_scheme::SL_SCHEME_BOTH => PostSelectScheme::Both,
        };
        let kept = postselect(&p.detections, scheme);
        let values = if decoded { p.corrected.clone() } else { p.raw() };
        let c = logical_fidelity(&values, &kept, p.target, p.k, ErrorBar::Wald);
        *out = sl_fidelity { fidelity: c.fidelity, std_error: c.stderr, retained: c.retained as u64, total: c.total as u64 };
        Ok(())
    })
}

/// Fits `F(k) = (1 + (1 - 2ε)^(k - k0)) / 2` to `n` points.
#[no_mangle]
pub unsafe extern "C" fn sl_fit_decay(ks: *const f64, fidelities: *const f64, n: usize, out: *mut sl_fit) -> sl_status {
    guard(|| {
        if ks.is_null() || fidelities.is_null() {
            return Err(null("input array"));
        }
        let out = out_ptr(out, "out")?;
        let ks = std::slice::from_raw_parts(ks, n);
        let fs = std::slice::from_raw_parts(fidelities, n);
        let pts: Vec<(f64, f64)> = ks.iter().copied().zip(fs.iter().copied()).collect();
        let f = fit_logical_error(&pts).map_err(fail)?;
        *out = sl_fit { epsilon: f.epsilon, k0: f.k0, residual: f.residual };
        Ok(())
    })
}

/// `τ_cycle / (2ε)`; infinity when `epsilon` is zero.
#[no_mangle]
pub unsafe extern "C" fn sl_logical_lifetime(epsilon: f64, tau_cycle_us: f64, out: *mut f64) -> sl_status {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let l = logical_lifetime(epsilon, tau_cycle_us).map_err(fail)?;
        *out = l.t_l_us.unwrap_or(f64::INFINITY);
        Ok(())
    })
}

/// Cross-entropy benchmark of the random circuit generated from `seed`.
#[no_mangle]
pub unsafe extern "C" fn sl_xeb_run(
    cal: *const SlCalibration,
    seed: u64,
    samples: u64,
    trajectories: u64,
    noisy: bool,
    out: *mut sl_xeb_result,
) -> sl_status {
    guard(|| {
        let cal = in_ref(cal, "cal")?;
        let out = out_ptr(out, "out")?;
        let layout = CodeLayout::new(3).map_err(fail)?;
        let cfg = XebConfig {
            samples: samples as usize,
            trajectories: trajectories as usize,
            noise: noisy.then(NoiseOptions::default),
        };
        let r = run_xeb(&layout, &cal.0, seed, &cfg).map_err(fail)?.result;
        *out = sl_xeb_result { fidelity: r.fidelity, std_error: r.stderr, predicted: r.predicted.unwrap_or(f64::NAN) };
        Ok(())
    })
}
