//! C ABI over `airblock-core`.
//!
//! Scenarios and traces cross the boundary as opaque handles. Every call
//! returns an [`AbStatus`]; on failure the message is available from
//! [`ab_last_error`] on the same thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use airblock_core::cli::scenario_file::parse_scenario;
use airblock_core::cli::trace_csv::trace_to_csv;
use airblock_core::geometry::{Angle, Vec2};
use airblock_core::safety_filter::{filter_heading, SafetyParams, TurnPreference};
use airblock_core::sim::{run_scenario, EventKind, ScenarioConfig, SimulationTrace};
use airblock_core::Error;

/// Result code of every `ab_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    InvalidConfig = 3,
    SafetyViolated = 4,
    InvalidArgument = 5,
    OutOfRange = 6,
    Internal = 7,
    Panic = 8,
}

/// Parsed and validated scenario.
pub struct AbScenario {
    config: ScenarioConfig,
}

/// Completed simulation run.
pub struct AbTrace {
    trace: SimulationTrace,
}

/// One trace event. `other` is -1 when the event has no counterpart.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbEvent {
    pub time: f64,
    pub step: u64,
    /// Index into the kinds listed by `ab_event_kind_name`.
    pub kind: u32,
    /// Zero-based airplane index.
    pub agent: u32,
    pub other: i32,
}

const KINDS: [EventKind; 9] = [
    EventKind::BlockingStart,
    EventKind::BlockingEnd,
    EventKind::UnblockStart,
    EventKind::TargetEstimated,
    EventKind::TemporaryTargetReached,
    EventKind::TargetReached,
    EventKind::SafetyViolation,
    EventKind::DeadlockFlag,
    EventKind::LivelockFlag,
];

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> AbStatus {
    match e {
        Error::Parse { .. } => AbStatus::Parse,
        Error::InvalidConfig(_) | Error::UnstableGain { .. } => AbStatus::InvalidConfig,
        Error::SafetyViolated { .. } => AbStatus::SafetyViolated,
        Error::InvalidInput(_) | Error::DegenerateGeometry(_) | Error::TargetReached | Error::Precondition(_) => {
            AbStatus::InvalidArgument
        }
        Error::Internal(_) | Error::Io(_) => AbStatus::Internal,
    }
}

/// Runs `f` with panics and errors mapped onto status codes.
fn guard(f: impl FnOnce() -> Result<(), (AbStatus, String)>) -> AbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            AbStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (AbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AbStatus, String) {
    (AbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (AbStatus, String)> {
    // SAFETY: caller guarantees `p` is null or points to a live value.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (AbStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the caller's contract, writable.
    unsafe { out.write(value) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next `ab_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario document (UTF-8 JSON). On success `*out` owns a new
/// handle to be released with `ab_scenario_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_scenario_from_json(json: *const c_char, out: *mut *mut AbScenario) -> AbStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (AbStatus::Parse, format!("scenario is not UTF-8: {e}")))?;
        let config = parse_scenario(text).map_err(core_err)?;
        let handle = Box::into_raw(Box::new(AbScenario { config }));
        // SAFETY: checked non-null above.
        unsafe { out.write(handle) };
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from `ab_scenario_from_json` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ab_scenario_free(scenario: *mut AbScenario) {
    if !scenario.is_null() {
        // SAFETY: ownership returns from C exactly once.
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_scenario_agent_count(scenario: *const AbScenario, out: *mut usize) -> AbStatus {
    guard(|| {
        let s = unsafe { as_ref(scenario, "scenario") }?;
        unsafe { write_out(out, s.config.agents.len(), "out") }
    })
}

/// Runs the scenario to completion or horizon. On success `*out` owns a new
/// trace handle to be released with `ab_trace_free`.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_simulate(scenario: *const AbScenario, out: *mut *mut AbTrace) -> AbStatus {
    guard(|| {
        let s = unsafe { as_ref(scenario, "scenario") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let trace = run_scenario(&s.config).map_err(core_err)?;
        let handle = Box::into_raw(Box::new(AbTrace { trace }));
        // SAFETY: checked non-null above.
        unsafe { out.write(handle) };
        Ok(())
    })
}

/// Releases a trace. Null is ignored.
///
/// # Safety
/// `trace` must come from `ab_simulate` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_free(trace: *mut AbTrace) {
    if !trace.is_null() {
        // SAFETY: ownership returns from C exactly once.
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_step_count(trace: *const AbTrace, out: *mut usize) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        unsafe { write_out(out, t.trace.steps.len(), "out") }
    })
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_agent_count(trace: *const AbTrace, out: *mut usize) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        unsafe { write_out(out, t.trace.agent_count(), "out") }
    })
}

/// Position and heading of `agent` at `step`.
///
/// # Safety
/// `trace` must be a live handle; `x`, `y` and `heading` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_state(
    trace: *const AbTrace,
    step: usize,
    agent: usize,
    x: *mut f64,
    y: *mut f64,
    heading: *mut f64,
) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        let sample = t
            .trace
            .steps
            .get(step)
            .and_then(|s| s.agents.get(agent))
            .ok_or_else(|| (AbStatus::OutOfRange, format!("no sample for step {step}, agent {agent}")))?;
        if x.is_null() || y.is_null() || heading.is_null() {
            return Err(null("output"));
        }
        unsafe {
            x.write(sample.position.x);
            y.write(sample.position.y);
            heading.write(sample.heading.radians());
        }
        Ok(())
    })
}

/// Smallest pairwise separation seen over the run, m.
///
/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_min_separation(trace: *const AbTrace, out: *mut f64) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        unsafe { write_out(out, t.trace.min_separation, "out") }
    })
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_event_count(trace: *const AbTrace, out: *mut usize) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        unsafe { write_out(out, t.trace.events.len(), "out") }
    })
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_event(trace: *const AbTrace, index: usize, out: *mut AbEvent) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        let e =
            t.trace.events.get(index).ok_or_else(|| (AbStatus::OutOfRange, format!("event {index} out of range")))?;
        let kind = KINDS.iter().position(|k| *k == e.kind).ok_or((AbStatus::Internal, "unknown event kind".into()))?;
        let ev = AbEvent {
            time: e.time,
            step: e.step as u64,
            kind: kind as u32,
            agent: e.agent as u32,
            other: e.other.map_or(-1, |o| o as i32),
        };
        unsafe { write_out(out, ev, "out") }
    })
}

/// Static name of an event kind code, or null if the code is unknown.
#[no_mangle]
pub extern "C" fn ab_event_kind_name(kind: u32) -> *const c_char {
    const NAMES: [&str; 9] = [
        "BlockingStart\0",
        "BlockingEnd\0",
        "UnblockStart\0",
        "TargetEstimated\0",
        "TemporaryTargetReached\0",
        "TargetReached\0",
        "SafetyViolation\0",
        "DeadlockFlag\0",
        "LivelockFlag\0",
    ];
    NAMES.get(kind as usize).map_or(ptr::null(), |s| s.as_ptr().cast())
}

/// Renders the trace as CSV. `*out` receives a string to be released with
/// `ab_string_free`.
///
/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ab_trace_to_csv(trace: *const AbTrace, out: *mut *mut c_char) -> AbStatus {
    guard(|| {
        let t = unsafe { as_ref(trace, "trace") }?;
        let csv = CString::new(trace_to_csv(&t.trace)).map_err(|_| (AbStatus::Internal, "NUL in csv".into()))?;
        unsafe { write_out(out, csv.into_raw(), "out") }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from an `ab_*` function documented to return an owned string.
#[no_mangle]
pub unsafe extern "C" fn ab_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Closed-form safety filter for one airplane against one other.
/// `preference` is +1 or -1 and picks the side when the cruising heading
/// points straight at the other airplane.
///
/// # Safety
/// `theta_out` must be writable; `activated_out` may be null.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ab_filter_heading(
    px_i: f64,
    py_i: f64,
    px_j: f64,
    py_j: f64,
    phi: f64,
    r: f64,
    alpha: f64,
    speed: f64,
    preference: i32,
    theta_out: *mut f64,
    activated_out: *mut bool,
) -> AbStatus {
    guard(|| {
        let params = SafetyParams::new(r, alpha, speed);
        params.validate().map_err(core_err)?;
        if !phi.is_finite() {
            return Err((AbStatus::InvalidArgument, "phi must be finite".into()));
        }
        let pref = match preference {
            1 => TurnPreference::Positive,
            -1 => TurnPreference::Negative,
            other => return Err((AbStatus::InvalidArgument, format!("preference must be +1 or -1, got {other}"))),
        };
        let d = filter_heading(Vec2::new(px_i, py_i), Vec2::new(px_j, py_j), Angle::wrap(phi), pref, &params)
            .map_err(core_err)?;
        unsafe { write_out(theta_out, d.theta.radians(), "theta_out") }?;
        if !activated_out.is_null() {
            unsafe { activated_out.write(d.activated) };
        }
        Ok(())
    })
}
