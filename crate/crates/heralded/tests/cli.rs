//! End-to-end checks of the command-line binary: exit codes, report
//! determinism, and the JSON surface that other tools consume.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heralded"))
}

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

#[test]
fn simulate_bell_pair_reports_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = bin()
        .args(["simulate"])
        .arg(sample("bell_pair.json"))
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "simulate");
    assert_eq!(doc["scheme"], "two_term_2mode");
    assert!(doc["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(doc["stages"].as_array().unwrap().len(), 7);
    assert_eq!(doc["state"].as_array().unwrap().len(), 2);

    // the file holds exactly the bytes that went to stdout
    let written = std::fs::read(&report).unwrap();
    assert_eq!(written, out.stdout);
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        bin()
            .args(["simulate"])
            .arg(sample("qutrit_pair.json"))
            .output()
            .unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn plan_describes_devices_and_stages() {
    let out = bin().args(["plan"]).arg(sample("four_mode.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "plan");
    assert_eq!(doc["scheme"], "two_term_Mmode");
    assert_eq!(doc["devices"].as_array().unwrap().len(), 4);
    assert!(doc["total_probability"].as_f64().unwrap() > 0.0);
    assert!(doc["attempts_no_memory"].as_f64().unwrap() >= 1.0);
    for dev in doc["devices"].as_array().unwrap() {
        assert_eq!(dev["kind"], "polarized");
    }
}

#[test]
fn gate_success_scales_the_swap_stage() {
    let stage = |args: &[&str]| -> f64 {
        let mut cmd = bin();
        cmd.args(["simulate"]).arg(sample("bell_pair.json")).args(args);
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        doc["stages"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["label"] == "swap")
            .unwrap()["simulated"]
            .as_f64()
            .unwrap()
    };
    let full = stage(&[]);
    let half = stage(&["--gate-success", "bell=0.5"]);
    assert!((half - 0.5 * full).abs() < 1e-12, "swap {full} vs degraded {half}");
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let missing = bin().args(["simulate", "no_such_file.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let mut garbled = tempfile::NamedTempFile::new().unwrap();
    write!(garbled, "not json at all").unwrap();
    let parse = bin().args(["simulate"]).arg(garbled.path()).output().unwrap();
    assert_eq!(parse.status.code(), Some(2));

    let scheme = bin()
        .args(["plan"])
        .arg(sample("bell_pair.json"))
        .args(["--scheme", "imaginary"])
        .output()
        .unwrap();
    assert_eq!(scheme.status.code(), Some(2));

    // three terms cannot go through the two-term layout
    let mismatch = bin()
        .args(["simulate"])
        .arg(sample("qutrit_pair.json"))
        .args(["--scheme", "two_term_2mode"])
        .output()
        .unwrap();
    assert_eq!(mismatch.status.code(), Some(2));

    let unknown_suite = bin().args(["oracle", "bogus"]).output().unwrap();
    assert_eq!(unknown_suite.status.code(), Some(2));
}

#[test]
fn oracle_subcommand_reports_every_suite() {
    let out = bin().args(["oracle", "all"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["subtraction", "two-term", "multi-term", "scissors"] {
        assert!(text.contains(&format!("oracle {name}:")), "missing {name} in:\n{text}");
    }
    assert_eq!(text.matches("(ok)").count(), 4);
}
