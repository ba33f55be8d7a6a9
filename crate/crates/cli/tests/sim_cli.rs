use std::process::Command;

use serde_json::Value;

fn run_headless(seed: &str, extra: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_sim")).args(["run", "--headless", "--seed", seed]).args(extra).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn headless_field_course_arrives() {
    let report = run_headless("11", &[]);
    assert_eq!(report["outcome"], "arrived");
    assert_eq!(report["waypointsReached"], 6);
    for entry in report["visionEntries"].as_array().unwrap() {
        assert!(entry["trueDistanceM"].as_f64().unwrap() <= 3.5);
    }
}

#[test]
fn recorded_trace_and_scenario_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("course.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_sim")).arg("scenario").output().unwrap();
    assert!(out.status.success());
    std::fs::write(&scenario, &out.stdout).unwrap();

    let trace = dir.path().join("trace.ndjson");
    let a = run_headless("5", &["--scenario", scenario.to_str().unwrap(), "--record", trace.to_str().unwrap()]);
    let b = run_headless("5", &[]);
    assert_eq!(a["telemetrySha256"], b["telemetrySha256"], "file scenario matches the built-in one");

    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() > 100);
    let t: Vec<u64> = lines.iter().map(|l| l["t"].as_u64().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn missing_scenario_is_an_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_sim")).args(["run", "--headless", "--scenario", "/nonexistent.toml"]).output().unwrap();
    assert!(!out.status.success());
}
