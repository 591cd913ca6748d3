//! C ABI for the `qframe` simulator.
//!
//! Objects are opaque handles created by `qf_*_new`/`qf_*_from_*` calls and
//! released with the matching `qf_*_free`. Every fallible call returns a
//! [`QfStatus`]; on failure [`qf_last_error`] describes the cause for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qframe::dynamics::Trajectory;
use qframe::scenario::{self, ScenarioConfig, SpectrumReport};
use qframe::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    IntegratorAbort = 4,
    Io = 5,
    Numerical = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Scenario configuration handle.
pub struct QfScenario(ScenarioConfig);

/// Integrated trajectory handle.
pub struct QfTrajectory(Trajectory);

/// One trajectory row. `transmon_occupation` is NaN for two-level devices.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QfSample {
    pub t: f64,
    pub kappa_t: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub photon_number: f64,
    pub real_quadrature: f64,
    pub abs_c_u: f64,
    pub transmon_occupation: f64,
    pub trace_error: f64,
}

/// Dispersive quantities of a labeled spectrum. `n_crit` is +inf when the
/// coupling vanishes; `e_ef` and `anharmonicity` are NaN for two levels.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QfDispersive {
    pub omega_c_ren: f64,
    pub chi: f64,
    pub omega_c_ren_pert: f64,
    pub chi_pert: f64,
    pub n_crit: f64,
    pub e_ge: f64,
    pub e_ef: f64,
    pub anharmonicity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QfStatus {
    match e {
        Error::IntegratorAbort { .. } => QfStatus::IntegratorAbort,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => QfStatus::Io,
        Error::Eigensolver(_) | Error::AmbiguousSeed { .. } | Error::MissingLabel { .. } => {
            QfStatus::Numerical
        }
        _ => QfStatus::Config,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (QfStatus, String)>) -> QfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QfStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            QfStatus::Panic
        }
    }
}

fn lib(e: Error) -> (QfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QfStatus, String) {
    (QfStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (QfStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next `qf_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library name and version, static storage.
#[no_mangle]
pub extern "C" fn qf_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Parses a TOML scenario.
///
/// # Safety
/// `toml` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_scenario_from_toml(toml: *const c_char, out: *mut *mut QfScenario) -> QfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ScenarioConfig::from_toml_str(text(toml, "toml")?).map_err(lib)?;
        store(out, QfScenario(cfg));
        Ok(())
    })
}

/// Copies one job of a built-in preset, e.g. `("fig2", "q_n5")`.
///
/// # Safety
/// String arguments must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qf_scenario_from_preset(
    preset: *const c_char,
    label: *const c_char,
    out: *mut *mut QfScenario,
) -> QfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = scenario::preset(text(preset, "preset")?).map_err(lib)?;
        let label = text(label, "label")?;
        let job = p
            .job(label)
            .ok_or_else(|| (QfStatus::Config, format!("preset {} has no job `{label}`", p.name)))?;
        store(out, QfScenario(job.config.clone()));
        Ok(())
    })
}

/// Sets a dotted config field from a TOML literal, e.g.
/// `("drive.amplitude", "7e-3")`. The scenario is unchanged on failure.
///
/// # Safety
/// `scenario` must be a live handle; strings must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn qf_scenario_set(
    scenario: *mut QfScenario,
    path: *const c_char,
    value: *const c_char,
) -> QfStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.0 = s.0.with_param(text(path, "path")?, text(value, "value")?).map_err(lib)?;
        Ok(())
    })
}

/// Writes the scenario as TOML into `buf` (nul-terminated). `needed`
/// receives the required size including the terminator; pass a null
/// `buf` to query it.
///
/// # Safety
/// `buf` must hold `len` bytes when non-null; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn qf_scenario_to_toml(
    scenario: *const QfScenario,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> QfStatus {
    guard(|| {
        let s = handle(scenario, "scenario")?;
        let t = s.0.to_toml_string().map_err(lib)?;
        let size = t.len() + 1;
        if !needed.is_null() {
            *needed = size;
        }
        if buf.is_null() {
            return Ok(());
        }
        if len < size {
            return Err((QfStatus::BufferTooSmall, format!("need {size} bytes, got {len}")));
        }
        ptr::copy_nonoverlapping(t.as_ptr(), buf.cast(), t.len());
        *buf.add(t.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qf_scenario_free(scenario: *mut QfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Integrates the scenario in memory. An integrator abort returns
/// `IntegratorAbort` and still stores the partial trajectory in `out`.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_simulate(scenario: *const QfScenario, out: *mut *mut QfTrajectory) -> QfStatus {
    guard(|| {
        let s = handle(scenario, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let tr = scenario::simulate(&s.0).map_err(lib)?;
        let abort = tr.diagnostics.abort.clone();
        store(out, QfTrajectory(tr));
        match abort {
            Some(a) => Err((
                QfStatus::IntegratorAbort,
                format!("integrator aborted at t = {}: {}", a.t, a.reason),
            )),
            None => Ok(()),
        }
    })
}

/// Runs the scenario and writes its artifacts into `dir`, like the
/// command-line `run`.
///
/// # Safety
/// `scenario` must be a live handle and `dir` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn qf_run_to_dir(scenario: *const QfScenario, dir: *const c_char) -> QfStatus {
    guard(|| {
        let s = handle(scenario, "scenario")?;
        let rec = scenario::run(&s.0, Path::new(text(dir, "dir")?)).map_err(lib)?;
        match rec.status {
            scenario::RunStatus::Complete => Ok(()),
            scenario::RunStatus::Aborted { t, reason } => Err((
                QfStatus::IntegratorAbort,
                format!("integrator aborted at t = {t}: {reason}"),
            )),
        }
    })
}

/// # Safety
/// `trajectory` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_trajectory_len(trajectory: *const QfTrajectory, len: *mut usize) -> QfStatus {
    guard(|| {
        let t = handle(trajectory, "trajectory")?;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = t.0.samples.len();
        Ok(())
    })
}

/// # Safety
/// `trajectory` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_trajectory_sample(
    trajectory: *const QfTrajectory,
    index: usize,
    out: *mut QfSample,
) -> QfStatus {
    guard(|| {
        let t = handle(trajectory, "trajectory")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = t.0.samples.len();
        let s = t
            .0
            .samples
            .get(index)
            .ok_or_else(|| (QfStatus::OutOfRange, format!("index {index} out of {n} samples")))?;
        *out = QfSample {
            t: s.t,
            kappa_t: s.kappa_t,
            alpha_re: s.alpha.re,
            alpha_im: s.alpha.im,
            photon_number: s.photon_number,
            real_quadrature: s.real_quadrature,
            abs_c_u: s.abs_c_u,
            transmon_occupation: s.transmon_occupation.unwrap_or(f64::NAN),
            trace_error: s.trace_error,
        };
        Ok(())
    })
}

/// 1 when the integration reached `t_end`, 0 after an abort, -1 for a null handle.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_trajectory_is_complete(trajectory: *const QfTrajectory) -> c_int {
    match trajectory.as_ref() {
        Some(t) => t.0.is_complete() as c_int,
        None => -1,
    }
}

/// # Safety
/// `trajectory` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qf_trajectory_free(trajectory: *mut QfTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Labels the joint spectrum at `spectrum.n_max` and reports the
/// dispersive quantities.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_dispersive(scenario: *const QfScenario, out: *mut QfDispersive) -> QfStatus {
    guard(|| {
        let s = handle(scenario, "scenario")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (model, spec) = scenario::reference_spectrum(&s.0).map_err(lib)?;
        let r: SpectrumReport = scenario::spectrum_report(&model, &spec).map_err(lib)?;
        *out = QfDispersive {
            omega_c_ren: r.dispersive.omega_c_ren,
            chi: r.dispersive.chi,
            omega_c_ren_pert: r.dispersive.omega_c_ren_pert,
            chi_pert: r.dispersive.chi_pert,
            n_crit: r.dispersive.n_crit.0,
            e_ge: r.qubit.e_ge,
            e_ef: r.qubit.e_ef.unwrap_or(f64::NAN),
            anharmonicity: r.qubit.anharmonicity.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}
