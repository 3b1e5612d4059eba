use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use airblock_ffi::*;

const FIG8: &str = include_str!("../../core/scenarios/fig8.scenario");

fn last_error() -> String {
    let p = ab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(text: &str) -> Result<*mut AbScenario, AbStatus> {
    let json = CString::new(text).unwrap();
    let mut handle = ptr::null_mut();
    match unsafe { ab_scenario_from_json(json.as_ptr(), &mut handle) } {
        AbStatus::Ok => Ok(handle),
        s => Err(s),
    }
}

#[test]
fn simulate_through_handles_matches_core() {
    let scenario = load(FIG8).unwrap();
    let mut n = 0usize;
    assert_eq!(unsafe { ab_scenario_agent_count(scenario, &mut n) }, AbStatus::Ok);
    assert_eq!(n, 2);

    let mut trace = ptr::null_mut();
    assert_eq!(unsafe { ab_simulate(scenario, &mut trace) }, AbStatus::Ok);
    let expected = airblock_core::sim::run_scenario(&airblock_core::cli::parse_scenario(FIG8).unwrap()).unwrap();

    let mut steps = 0usize;
    assert_eq!(unsafe { ab_trace_step_count(trace, &mut steps) }, AbStatus::Ok);
    assert_eq!(steps, expected.steps.len());
    let mut agents = 0usize;
    assert_eq!(unsafe { ab_trace_agent_count(trace, &mut agents) }, AbStatus::Ok);
    assert_eq!(agents, 2);

    let (mut x, mut y, mut h) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { ab_trace_state(trace, steps - 1, 1, &mut x, &mut y, &mut h) }, AbStatus::Ok);
    let last = &expected.steps[steps - 1].agents[1];
    assert_eq!((x, y, h), (last.position.x, last.position.y, last.heading.radians()));
    assert_eq!(unsafe { ab_trace_state(trace, steps, 0, &mut x, &mut y, &mut h) }, AbStatus::OutOfRange);

    let mut sep = 0.0;
    assert_eq!(unsafe { ab_trace_min_separation(trace, &mut sep) }, AbStatus::Ok);
    assert_eq!(sep, expected.min_separation);

    let mut events = 0usize;
    assert_eq!(unsafe { ab_trace_event_count(trace, &mut events) }, AbStatus::Ok);
    assert_eq!(events, expected.events.len());
    for (k, want) in expected.events.iter().enumerate() {
        let mut e = AbEvent { time: 0.0, step: 0, kind: 0, agent: 0, other: 0 };
        assert_eq!(unsafe { ab_trace_event(trace, k, &mut e) }, AbStatus::Ok);
        let name = unsafe { CStr::from_ptr(ab_event_kind_name(e.kind)) }.to_str().unwrap();
        assert_eq!(name, want.kind.as_str());
        assert_eq!(e.agent as usize, want.agent);
        assert_eq!(e.other, want.other.map_or(-1, |o| o as i32));
        assert_eq!(e.time, want.time);
    }

    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { ab_trace_to_csv(trace, &mut csv) }, AbStatus::Ok);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_string();
    assert_eq!(text, airblock_core::cli::trace_csv::trace_to_csv(&expected));
    unsafe {
        ab_string_free(csv);
        ab_trace_free(trace);
        ab_scenario_free(scenario);
    }
}

#[test]
fn errors_map_to_status_codes() {
    assert_eq!(load("{ not json").unwrap_err(), AbStatus::Parse);
    assert!(last_error().contains("line 1"));

    let close = FIG8.replace("[0.0, 30.0]", "[0.0, -10.0]");
    assert_eq!(load(&close).unwrap_err(), AbStatus::InvalidConfig);

    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { ab_scenario_from_json(ptr::null(), &mut handle) }, AbStatus::NullPointer);
    assert_eq!(unsafe { ab_simulate(ptr::null(), &mut ptr::null_mut()) }, AbStatus::NullPointer);
    assert!(last_error().contains("null"));

    // A successful call clears the message.
    let s = load(FIG8).unwrap();
    assert!(ab_last_error().is_null());
    unsafe { ab_scenario_free(s) };
    unsafe { ab_scenario_free(ptr::null_mut()) };
    unsafe { ab_trace_free(ptr::null_mut()) };
    assert!(ab_event_kind_name(99).is_null());
}

#[test]
fn filter_heading_matches_closed_form() {
    let (mut theta, mut active) = (0.0, false);
    // Heading straight at the other airplane at d = 31, r = 30: corrected by Δ.
    let st = unsafe { ab_filter_heading(0.0, 0.0, 31.0, 0.0, 0.0, 30.0, 3.0, 5.0, 1, &mut theta, &mut active) };
    assert_eq!(st, AbStatus::Ok);
    let h = 31.0f64 * 31.0 - 900.0;
    let delta = (3.0 * h / (4.0 * 5.0 * 31.0)).min(1.0).acos();
    assert!(active);
    assert!((theta - delta).abs() < 1e-12, "{theta} vs {delta}");

    let st = unsafe { ab_filter_heading(0.0, 0.0, 31.0, 0.0, 0.0, 30.0, 3.0, 5.0, -1, &mut theta, ptr::null_mut()) };
    assert_eq!(st, AbStatus::Ok);
    assert!((theta + delta).abs() < 1e-12);

    let st = unsafe { ab_filter_heading(0.0, 0.0, 20.0, 0.0, 0.0, 30.0, 3.0, 5.0, 1, &mut theta, &mut active) };
    assert_eq!(st, AbStatus::SafetyViolated);
    let st = unsafe { ab_filter_heading(0.0, 0.0, 31.0, 0.0, 0.0, 30.0, 3.0, 5.0, 0, &mut theta, &mut active) };
    assert_eq!(st, AbStatus::InvalidArgument);
    let st = unsafe { ab_filter_heading(0.0, 0.0, 40.0, 0.0, 0.0, -1.0, 3.0, 5.0, 1, &mut theta, &mut active) };
    assert_eq!(st, AbStatus::InvalidConfig);
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(ab_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/ffi-<hash>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/airblock.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for f in ["ab_scenario_from_json", "ab_simulate", "ab_trace_event", "ab_filter_heading", "ab_last_error"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let lib = profile_dir().join("libairblock_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no cc or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "airblock.h"
int main(int argc, char **argv) {
    FILE *f = fopen(argv[1], "rb");
    static char buf[1 << 16];
    size_t n = fread(buf, 1, sizeof buf - 1, f);
    buf[n] = 0;
    fclose(f);
    AbScenario *s = NULL;
    if (ab_scenario_from_json(buf, &s) != AB_STATUS_OK) return 10;
    AbTrace *t = NULL;
    if (ab_simulate(s, &t) != AB_STATUS_OK) return 11;
    size_t events = 0;
    double sep = 0;
    ab_trace_event_count(t, &events);
    ab_trace_min_separation(t, &sep);
    AbEvent e;
    ab_trace_event(t, 0, &e);
    printf("%zu %s %.3f\n", events, ab_event_kind_name(e.kind), sep);
    if (ab_scenario_from_json("{", &s) != AB_STATUS_PARSE) return 12;
    ab_trace_free(t);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let scenario = manifest.join("../core/scenarios/fig8.scenario");
    let run = Command::new(&exe).arg(scenario).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    let expected = airblock_core::sim::run_scenario(&airblock_core::cli::parse_scenario(FIG8).unwrap()).unwrap();
    let want =
        format!("{} {} {:.3}\n", expected.events.len(), expected.events[0].kind.as_str(), expected.min_separation);
    assert_eq!(String::from_utf8_lossy(&run.stdout), want);
}
