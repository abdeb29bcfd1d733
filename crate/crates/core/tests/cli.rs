//! End-to-end runs of the `dec2d` binary.

use std::process::{Command, Output};

use dec2d::mesh::{Domain, FamilyKind, FamilySpec};
use dec2d::study::{StudyConfig, StudyKind, StudyResult};

fn dec2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dec2d")).args(args).output().expect("binary runs")
}

#[test]
fn same_seed_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = dec2d(&["norms", "--family", "square,perturbation=0.2", "--levels", "2", "--samples", "50", "--seed", "9", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}

#[test]
fn json_output_parses_back() {
    let out = dec2d(&["counterexample", "--eps", "0.1,0.01,0.001", "--format", "json"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let result = StudyResult::from_json(&text).unwrap();
    assert_eq!(result.rows.len(), 9);
    assert_eq!(result.to_json().unwrap(), text);
    assert!((result.slope("dec_norm_sq").unwrap().slope.unwrap() - 1.0).abs() < 0.01);
}

#[test]
fn inadmissible_family_exits_with_two() {
    for study in ["ip-error", "converge"] {
        let out = dec2d(&[study, "--family", "square,random,min_angle=none", "--levels", "2", "--samples", "10"]);
        assert_eq!(out.status.code(), Some(2), "{study}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(dec2d(&["bogus"]).status.code(), Some(1));
    assert_eq!(dec2d(&["norms", "--family", "triangle"]).status.code(), Some(1));
    let out = dec2d(&["counterexample", "--eps", "0.01,0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps[1]"));
}

#[test]
fn empty_result_is_header_only() {
    let config = StudyConfig::new(StudyKind::Quality, FamilySpec::new(Domain::Square, FamilyKind::StructuredPerturbed, 1, 0.0, 1));
    assert_eq!(StudyResult::new(Vec::new(), config).to_csv(), "h,metric,value\n");
}
