use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdash-sim"))
}

fn scenarios() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn trace_scenario_from_file() {
    let out = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("step.cfg");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out-dir", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = fs::read_to_string(out.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 6);
    assert!(runs.lines().skip(1).all(|l| l.split(',').nth(1) == Some("NA")));
}

#[test]
fn flags_override_the_file() {
    let out = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("vehicular.cfg");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--algorithm",
        "osmf",
        "--speed",
        "10",
        "--iterations",
        "3",
        "--seed",
        "9",
        "--set",
        "scenario.duration_limit_s=100",
        "--format",
        "json",
        "--out-dir",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.path().join("results.json")).unwrap()).unwrap();
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r["algorithm"] == "osmf" && r["speed_mps"] == 10.0));
    assert_eq!(doc["aggregate"].as_array().unwrap().len(), 6);
    assert!(!out.path().join("runs.csv").exists());
}

#[test]
fn trace_flag_uses_trace_file() {
    let out = tempfile::tempdir().unwrap();
    let trace = scenarios().join("step.trace");
    let o = run(&["--trace", trace.to_str().unwrap(), "--algorithm", "fdash,svaa", "--out-dir", out.path().to_str().unwrap()]);
    assert!(o.status.success());
    let agg = fs::read_to_string(out.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + 2 * 6);
}

#[test]
fn config_errors_exit_1() {
    let o = run(&["--algorithm", "fdash,pftm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pftm"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[scenario]\niterations = 2\n[fdash]\ntarget = 3\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.cfg:4") && err.contains("fdash.target"), "{err}");

    let o = run(&["--trace", "/no/such/file.trace"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run(&["--speed", "5", "--iterations", "1", "--algorithm", "osmf", "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
