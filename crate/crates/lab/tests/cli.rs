use std::path::Path;
use std::process::{Command, Output};

use nudlab::report::{read_flat_table, read_report_json};

fn nudlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nudlab")).args(args).current_dir(cwd).env_remove("NUDLAB_OUT_DIR").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn list_names_every_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = nudlab(&["list"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    for e in nudlab::Experiment::ALL {
        assert!(text.lines().any(|l| l.starts_with(e.name())), "{} missing", e.name());
    }
}

#[test]
fn passing_run_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = nudlab(&["run", "partition-check", "--quick", "--out", "reports"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("PASS ")));
    let report = read_report_json(&dir.path().join("reports/partition-check.json")).unwrap();
    assert!(report.passed() && report.quick);
    let table = read_flat_table(&dir.path().join("reports/partition-check.csv")).unwrap();
    assert!(table.column("measured").is_some());
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // the quotient at the grid spacing stays far above the vanishing threshold
    let out = nudlab(&["run", "holder-vanishing", "--set", "grid=64", "--set", "freqs=8", "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("FAIL ")));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["run", "no-such-experiment"],
        &["run", "partition-check", "--set", "colour=blue"],
        &["run", "lemma-tlemp", "--set", "s=abc"],
        &["run", "partition-check", "--config", "missing.cfg"],
    ];
    for args in cases {
        let out = nudlab(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unknown_key_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = nudlab(&["run", "partition-check", "--set", "colour=blue"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn config_file_and_environment_choose_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "instances = 50\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nudlab"))
        .args(["run", "partition-check", "--config", "run.cfg"])
        .current_dir(dir.path())
        .env("NUDLAB_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report = read_report_json(&dir.path().join("from-env/partition-check.json")).unwrap();
    assert_eq!(report.config.get("instances").map(String::as_str), Some("50"));

    let out = nudlab(&["run", "partition-check", "--quick"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("nudlab-out/partition-check.csv").exists());
}
