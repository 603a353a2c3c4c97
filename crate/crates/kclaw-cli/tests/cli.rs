//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kclaw(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kclaw"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn construct_then_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = kclaw(
        &["construct", "2", "2", "2", "--out-dir", "run"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let graph = dir.path().join("run/graph.txt");
    assert!(graph.exists());
    assert!(dir.path().join("run/trail.txt").exists());
    assert!(dir.path().join("run/certificate.txt").exists());
    let verify = kclaw(&["verify", "run/graph.txt", "2", "2"], dir.path());
    assert!(
        verify.status.success(),
        "{}",
        String::from_utf8_lossy(&verify.stderr)
    );
    assert!(stdout(&verify).contains("valid true"));
}

#[test]
fn construct_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let out = kclaw(&["construct", "3", "2", "2", "--out-dir", run], dir.path());
        assert!(out.status.success());
    }
    for file in ["graph.txt", "trail.txt", "certificate.txt"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn convolve_square_example() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.poly"), "2\n1/1\n-2/1\n1/1\n").unwrap();
    let out = kclaw(&["convolve", "p.poly", "p.poly", "2", "2"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), "2\n3/1\n-4/1\n1/1\n");
}

#[test]
fn bound_prints_enclosure() {
    let dir = tempfile::tempdir().unwrap();
    let out = kclaw(&["bound", "2", "3"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("3.65028"), "{}", stdout(&out));
    let json = kclaw(
        &[
            "bound", "2", "3", "--theta", "2", "--u", "1/10", "--n", "3", "--json",
        ],
        dir.path(),
    );
    assert!(json.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert!(parsed["spectral_bound"]["lo_approx"].as_f64().unwrap() > 3.65);
    assert!(parsed["r_value"]["lo_approx"].as_f64().unwrap() > 13.0);
}

#[test]
fn expected_poly_of_root_state() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("state.txt"),
        "2 2 2\ncompleted 0\ncurrent 0\n",
    )
    .unwrap();
    let out = kclaw(&["expected-poly", "state.txt"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1\n-4/1\n1/1\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Invalid input: missing file.
    let out = kclaw(&["verify", "missing.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Invalid input: k argument contradicts the header.
    fs::write(dir.path().join("g.txt"), "1 1 1\n1 1 1\n").unwrap();
    let out = kclaw(&["verify", "g.txt", "3", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Verification failure: biregular but not Ramanujan (doubled matching,
    // d=2, k=2: reduced poly (x-4)^(n-1) with bound² < 4... use k=2 n=2).
    fs::write(
        dir.path().join("bad.txt"),
        "2 2 2\n1 1 2\n2 2 2\n3 1 2\n4 2 2\n",
    )
    .unwrap();
    let out = kclaw(&["verify", "bad.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // Oracle failure: plain permutations are not minor-orthogonal.
    let out = kclaw(&["oracle", "minor-perm"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // Cap exceeded.
    let out = kclaw(&["oracle", "quadrature", "--cap", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    // Success.
    let out = kclaw(&["oracle", "signed-conv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn construct_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = kclaw(
        &["construct", "2", "2", "2", "--out-dir", "j", "--json"],
        dir.path(),
    );
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["valid"], serde_json::Value::Bool(true));
    assert_eq!(parsed["n"], 2);
    assert!(parsed["lambda2_numeric"].as_f64().unwrap() < 2.7320508076);
}

#[test]
fn workers_env_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kclaw"))
        .args([
            "construct",
            "2",
            "2",
            "2",
            "--out-dir",
            "w",
            "--workers",
            "1",
        ])
        .current_dir(dir.path())
        .env("KCLAW_WORKERS", "not-a-number")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = Command::new(env!("CARGO_BIN_EXE_kclaw"))
        .args(["oracle", "pipeline"])
        .current_dir(dir.path())
        .env("KCLAW_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}
