use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_msa-lab"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body.replace("DIR", &dir.display().to_string())).unwrap();
    path
}

#[test]
fn verify_suites_exit_codes() {
    let ok = bin().args(["verify", "--suite", "lemmas", "--instances", "5"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = bin().args(["verify", "--suite", "schedules", "--instances", "0", "--inject-q", "1.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let unknown = bin().args(["verify", "--suite", "bogus"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(3));
    assert_eq!(bin().arg("--help").status().unwrap().code(), Some(0));
}

#[test]
fn run_writes_identical_csv_twice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"graph": {"kind": "interval", "n": 41}, "ensemble": {"kind": "uniform01", "coupling": 6.0},
            "experiment": {"kind": "estimate", "quantity": "pk", "scale": 8},
            "trials": 25, "seed_base": 11, "energy": 3.0, "output": {"dir": "DIR", "prefix": "pk"}}"#,
    );
    let csv = dir.path().join("pk_trials.csv");
    let run = || bin().args(["--threads", "2", "run", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(run().code(), Some(0));
    let first = std::fs::read(&csv).unwrap();
    assert_eq!(run().code(), Some(0));
    assert_eq!(first, std::fs::read(&csv).unwrap());
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("pk_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["config"]["input"]["trials"], 25);
}

#[test]
fn thread_count_from_environment() {
    let out = bin().env("THREADS", "1").args(["verify", "--suite", "schedules", "--instances", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_exit_three_and_io_errors_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"graph": {"kind": "interval", "n": 10}, "unknown": 1}"#);
    assert_eq!(bin().args(["run", "--config"]).arg(&cfg).status().unwrap().code(), Some(3));
    assert_eq!(bin().args(["run", "--config", "/does/not/exist.json"]).status().unwrap().code(), Some(4));
}

#[test]
fn verify_config_without_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"graph": {"kind": "interval", "n": 10}, "ensemble": {"kind": "gaussian01", "coupling": 1.0},
            "experiment": {"kind": "verify", "suite": "all"}, "output": {"dir": "DIR"}}"#,
    );
    assert_eq!(bin().args(["run", "--config"]).arg(&cfg).status().unwrap().code(), Some(0));
    assert!(dir.path().join("msa-lab_summary.json").exists());
}
