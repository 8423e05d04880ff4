use std::process::{Command, Output};

use serde_json::Value;

fn qcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcomm"))
        .args(args)
        .output()
        .unwrap()
}

fn json_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn metrics_suite_exits_zero_with_slacks() {
    let out = qcomm(&[
        "--suite", "metrics", "--trials", "100", "--seed", "7", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["suite"], "metrics");
    assert_eq!(r["config"]["trials"], 100);
    let checks = r["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c["min_slack"].is_number());
        assert_eq!(c["trials"], 100);
        assert_eq!(c["violations"], 0);
    }
}

#[test]
fn rac_suite_prints_eps() {
    let out = qcomm(&["--suite", "rac", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("eps=0.146447"), "{text}");
    assert!(text.contains("PASS rac.lower_bound_n2"));
}

#[test]
fn all_suite_is_byte_identical() {
    let args = [
        "--suite", "all", "--trials", "1", "--seed", "1", "--format", "json",
    ];
    let a = qcomm(&args);
    let b = qcomm(&args);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn exit_code_tracks_violations() {
    for suite in [
        "metrics",
        "info",
        "transition",
        "encoding",
        "rac",
        "reduction",
    ] {
        let out = qcomm(&[
            "--suite", suite, "--trials", "40", "--seed", "5", "--format", "json",
        ]);
        let r = json_report(&out);
        let total: u64 = r["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["violations"].as_u64().unwrap())
            .sum();
        assert_eq!(
            out.status.code(),
            Some(if total == 0 { 0 } else { 1 }),
            "{suite}"
        );
        if total > 0 {
            assert!(String::from_utf8_lossy(&out.stderr).contains("violation"));
        }
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qcomm(&[
        "--suite",
        "info",
        "--trials",
        "5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}

#[test]
fn tolerance_override_is_reported() {
    let out = qcomm(&[
        "--suite", "metrics", "--trials", "3", "--tol", "1e-6", "--format", "json",
    ]);
    let r = json_report(&out);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["tolerance"].as_f64(), Some(1e-6));
    }
}

#[test]
fn bad_flags_exit_two() {
    for args in [
        vec!["--bogus"],
        vec!["--suite", "nope"],
        vec!["--trials", "0"],
        vec!["--trials", "x"],
        vec!["--dims", "1-4"],
        vec!["--dims", "8-2"],
        vec!["--dims", "a-b"],
        vec!["--tol", "-1"],
        vec!["--suite", "reduction", "--n", "3"],
        vec!["--suite", "rac", "--n", "7"],
        vec!["--format", "yaml"],
    ] {
        let out = qcomm(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let out = qcomm(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--suite"));
}
