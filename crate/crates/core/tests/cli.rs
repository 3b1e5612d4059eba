use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use airblock_core::cli::trace_csv::{events_from_csv, header};
use airblock_core::cli::{load_scenario, EXIT_CONFIG, EXIT_PARSE, EXIT_SAFETY};
use airblock_core::sim::run_scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_airblock"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("scenarios/{name}.scenario"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

const WEAK_FIELD: &str = r#"{
  "schema_version": 1,
  "name": "weak-field",
  "dynamics": { "model": "single_integrator", "speed": 5.0, "dt": 0.05 },
  "safety": { "r": 30.0, "alpha": 3.0 },
  "horizon": 40.0,
  "controllers": { "pf": { "k_att": 1.0, "k_rep": 1.0, "influence_radius": 30.0 } },
  "agents": [
    { "position": [-60.0, 0.0], "target": [100.0, 10.0], "controller": "pf" },
    { "position": [60.0, 0.0], "target": [-100.0, -10.0], "controller": "pf" }
  ]
}"#;

#[test]
fn simulate_writes_trace_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = (dir.path().join("t.csv"), dir.path().join("t.svg"));
    let out = run(bin().arg("simulate").arg(scenario("fig8")).arg("--out").arg(&csv).arg("--plot").arg(&svg));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), header(2));
    assert!(!text.contains('\r'));
    let trace = run_scenario(&load_scenario(&scenario("fig8")).unwrap()).unwrap();
    assert_eq!(text.lines().count(), trace.steps.len() + 1);
    let labels: Vec<String> = events_from_csv(&text).into_iter().flat_map(|(_, l)| l).collect();
    let want: Vec<String> = trace.events.iter().map(|e| e.label()).collect();
    assert_eq!(labels, want);
    let kinds: Vec<&str> =
        labels.iter().map(|l| l.split('@').next().unwrap()).filter(|k| !k.starts_with("Blocking")).collect();
    assert_eq!(
        kinds,
        [
            "TargetEstimated",
            "TargetEstimated",
            "UnblockStart",
            "TemporaryTargetReached",
            "TargetReached",
            "TargetReached"
        ]
    );

    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg"));
    assert!(plot.trim_end().ends_with("</svg>"));
    assert_eq!(plot.matches("<polyline class=\"track\"").count(), 2);
    assert_eq!(plot.matches("<rect class=\"target\"").count(), 2);
    assert_eq!(plot.matches("<circle class=\"event\"").count(), trace.events.len());
    assert!(plot.contains("class=\"active\""));
}

#[test]
fn deadlock_trace_carries_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let out = run(bin().arg("simulate").arg(scenario("deadlock")).arg("--out").arg(&csv));
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&csv).unwrap().contains("DeadlockFlag@"));
}

#[test]
fn malformed_file_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scenario");
    std::fs::write(&bad, "{\n  \"schema_version\": 1,\n  \"name\": \"x\",,\n}").unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(bin().arg("simulate").arg(&bad).arg("--out").arg(&csv));
    assert_eq!(out.status.code(), Some(i32::from(EXIT_PARSE)));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert!(!csv.exists());
}

#[test]
fn invalid_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("close.scenario");
    let text = std::fs::read_to_string(scenario("fig8")).unwrap().replace("\"horizon\": 120.0", "\"horizon\": -1.0");
    std::fs::write(&bad, text).unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(bin().arg("simulate").arg(&bad).arg("--out").arg(&csv));
    assert_eq!(out.status.code(), Some(i32::from(EXIT_CONFIG)), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!csv.exists());
}

#[test]
fn strict_violation_exits_4_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weak.scenario");
    std::fs::write(&path, WEAK_FIELD).unwrap();
    let (csv, svg) = (dir.path().join("t.csv"), dir.path().join("t.svg"));
    let out = run(bin().arg("simulate").arg(&path).arg("--out").arg(&csv).arg("--plot").arg(&svg).arg("--strict"));
    assert_eq!(out.status.code(), Some(i32::from(EXIT_SAFETY)));
    assert!(!csv.exists() && !svg.exists());
    // Without --strict the run is reported, not rejected.
    let out = run(bin().arg("simulate").arg(&path).arg("--out").arg(&csv));
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&csv).unwrap().contains("SafetyViolation@"));
}

#[test]
fn montecarlo_stats_file() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("mc.json");
    let out =
        run(bin().args(["montecarlo", "--n", "6", "--seed", "7", "--strategies", "adaptive", "--out"]).arg(&stats));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v["n"], 6);
    assert_eq!(v["seed"], 7);
    let strategies = v["strategies"].as_object().unwrap();
    assert!(strategies.contains_key("maintain") && strategies.contains_key("adaptive"));
    for s in strategies.values() {
        assert!(s["mean_completion_s"].is_f64() && s["reduction_pct"].is_number());
        assert_eq!(s["violations"], 0);
    }
    assert_eq!(v["scenarios"].as_array().unwrap().len(), 6);

    let again = dir.path().join("mc2.json");
    let out = run(bin()
        .args(["montecarlo", "--n", "6", "--seed", "7", "--strategies", "adaptive", "--jobs", "1", "--out"])
        .arg(&again));
    assert!(out.status.success());
    assert_eq!(std::fs::read(&stats).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn montecarlo_rejects_unknown_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        run(bin().args(["montecarlo", "--n", "2", "--strategies", "psychic", "--out"]).arg(dir.path().join("x.json")));
    assert_eq!(out.status.code(), Some(i32::from(EXIT_CONFIG)));
}

fn value(report: &str, key: &str) -> f64 {
    let line = report.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in\n{report}"));
    line.split('=').nth(1).unwrap().trim().trim_end_matches(" s").parse().unwrap()
}

#[test]
fn analyze_fig8_bounds_bracket_the_simulated_episode() {
    let out = run(bin().arg("analyze").arg(scenario("fig8")));
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("free-flight threshold: 33.517"));
    let (lb, ub) = (value(&report, "t_lb"), value(&report, "t_ub"));
    assert!(lb <= ub);
    let sim: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("simulated blocking duration: "))
        .unwrap()
        .trim_end_matches(" s")
        .parse()
        .unwrap();
    assert!(sim >= lb - 0.05 && sim <= ub + 0.1, "{sim} not in [{lb}, {ub}]");
}

#[test]
fn analyze_verdicts() {
    let out = run(bin().arg("analyze").arg(scenario("mirror")));
    assert!(String::from_utf8_lossy(&out.stdout).contains("prediction: blocking predicted"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("apart.scenario");
    let text = std::fs::read_to_string(scenario("fig8"))
        .unwrap()
        .replace("[80.0, 50.0]", "[-80.0, -50.0]")
        .replace("[100.0, -30.0]", "[-100.0, 90.0]");
    std::fs::write(&path, text).unwrap();
    let out = run(bin().arg("analyze").arg(&path));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("prediction: no encounter point"));

    let out = run(bin().arg("analyze").arg(scenario("four_plane")));
    assert_eq!(out.status.code(), Some(i32::from(EXIT_CONFIG)));
}
