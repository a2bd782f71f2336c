use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn qdarwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdarwin"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("failed to spawn qdarwin")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 report")
}

fn assert_golden(scenario: &str, format: &str, golden: &str) {
    let path = format!("scenarios/{scenario}.toml");
    let out = qdarwin(&["--scenario", &path, "--format", format]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(golden))
        .expect("golden file");
    assert_eq!(stdout(&out), expected, "report for {scenario} drifted from {golden}");
}

#[test]
fn stage2_csv_matches_golden() {
    assert_golden("stage2-two-thirds", "csv", "stage2-two-thirds.csv");
}

#[test]
fn darwinism_text_matches_golden() {
    assert_golden("darwinism-n3", "text", "darwinism-n3.txt");
}

#[test]
fn bundled_suite_passes_and_is_sorted() {
    let out = qdarwin(&["--suite", "scenarios", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let mut names: Vec<&str> = text.lines().skip(1).map(|l| l.split(':').next().unwrap()).collect();
    names.dedup();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(names.len() >= 10);
}

#[test]
fn rerun_is_byte_identical() {
    let first = qdarwin(&["--suite", "scenarios", "--seed", "11"]);
    let second = qdarwin(&["--suite", "scenarios", "--seed", "11"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn seed_flag_changes_random_scenarios() {
    let a = qdarwin(&["--scenario", "scenarios/permutation.toml", "--seed", "1", "--format", "csv"]);
    let b = qdarwin(&["--scenario", "scenarios/permutation.toml", "--seed", "2", "--format", "csv"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn impossible_tolerance_exits_one() {
    let out = qdarwin(&["--scenario", "scenarios/stage3-irrational.toml", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "kind = \"game-value\"\nvalues = [0.0, 1.0]\nmultiplicities = [1, 2]\nregister = 4\n").unwrap();
    let out = qdarwin(&["--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiplicity sum mismatch"));

    let missing = qdarwin(&["--scenario", "scenarios/does-not-exist.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let empty = tempfile::tempdir().unwrap();
    let none = qdarwin(&["--suite", empty.path().to_str().unwrap()]);
    assert_eq!(none.status.code(), Some(2));

    let negative = qdarwin(&["--scenario", "scenarios/stage1.toml", "--tolerance", "-1"]);
    assert_eq!(negative.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = qdarwin(&[
        "--scenario",
        "scenarios/stage1.toml",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(path).unwrap();
    assert!(written.starts_with("check,value,oracle,deviation,pass\n"));
}
