use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ackhold_cli::{load_scenario, parse_scenario, run_report};

fn ackhold(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ackhold")).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn scenario_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "scenarios", name].iter().collect()
}

/// Data rows of a written table as `header -> column` lookups.
fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn schedule_for_short_outage_is_even() {
    let dir = tempfile::tempdir().unwrap();
    let out = ackhold(dir.path(), &["schedule", "-T", "2", "-N", "5"]);
    assert!(out.status.success());
    let (header, rows) = read_table(&dir.path().join("schedule.csv"));
    assert_eq!(column(&header, &rows, "gap"), vec![0.4; 5]);
    assert_eq!(column(&header, &rows, "release_offset"), vec![0.4, 0.8, 1.2, 1.6, 2.0]);
}

#[test]
fn rto_curve_without_deviation_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = ackhold(dir.path(), &["rto-curve", "-T", "10", "-N", "10", "--sigma0", "0"]);
    assert!(out.status.success());
    let (header, rows) = read_table(&dir.path().join("rto_curve.csv"));
    assert_eq!(rows.len(), 10);
    assert!(column(&header, &rows, "final_rto").iter().all(|&r| r == 1.0));
}

#[test]
fn rto_curve_single_ack_has_one_point() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ackhold(dir.path(), &["rto-curve", "-T", "1", "-N", "1"]).status.success());
    let (header, rows) = read_table(&dir.path().join("rto_curve.csv"));
    assert_eq!(column(&header, &rows, "n"), vec![0.0]);
    assert_eq!(column(&header, &rows, "is_argmin"), vec![1.0]);
}

#[test]
fn rto_curve_marks_both_minima_candidates() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ackhold(dir.path(), &["rto-curve", "-T", "1000", "-N", "30"]).status.success());
    let (header, rows) = read_table(&dir.path().join("rto_curve.csv"));
    assert_eq!(rows.len(), 12);
    let argmin = column(&header, &rows, "is_argmin");
    let scan = column(&header, &rows, "forward_scan_stop");
    assert_eq!(argmin.iter().position(|&v| v == 1.0), Some(9));
    assert_eq!(scan.iter().position(|&v| v == 1.0), Some(0));
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario_path("single_fade.toml");
    let out =
        ackhold(dir.path(), &["sweep", scenario.to_str().unwrap(), "--param", "prediction_error_factor", "--values="]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_table(&dir.path().join("sweep_prediction_error_factor.csv"));
    assert_eq!(header[0], "prediction_error_factor");
    assert!(rows.is_empty());
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario_path("single_fade.toml");
    let out = ackhold(dir.path(), &["--seed", "3", "run", scenario.to_str().unwrap()]);
    assert!(out.status.success());
    for name in ackhold_cli::RUN_FILES {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let (header, rows) = read_table(&dir.path().join("holder_trace.csv"));
    assert_eq!(header, ["time", "connection_id", "event", "mode", "emitted_count"]);
    assert!(rows.iter().any(|r| r[2] == "link_going_down"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = ackhold(dir.path(), &["run", "/nonexistent/scenario.toml"]);
    assert_eq!(missing.status.code(), Some(1));

    let scenario = scenario_path("single_fade.toml");
    let bad_param = ackhold(dir.path(), &["sweep", scenario.to_str().unwrap(), "--param", "bogus", "--values", "1"]);
    assert_eq!(bad_param.status.code(), Some(1));

    let bad_input = ackhold(dir.path(), &["schedule", "-T=-1", "-N", "5"]);
    assert_eq!(bad_input.status.code(), Some(1));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let unwritable = ackhold(&blocker.join("sub"), &["schedule", "-T", "2", "-N", "5"]);
    assert_eq!(unwritable.status.code(), Some(2));
}

#[test]
fn malformed_scenario_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "format = 1\n\n[prediction]\nlead = \"soon\"\n").unwrap();
    let err = load_scenario(&path).unwrap_err();
    assert!(err.to_string().contains("line 4"), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn no_fade_ratio_is_one() {
    let report = run_report(&load_scenario(&scenario_path("no_fade.toml")).unwrap(), None).unwrap();
    assert!((report.improvement_ratio - 1.0).abs() < 0.01, "{}", report.improvement_ratio);
}

#[test]
fn seed_override_changes_only_randomness() {
    let spec = parse_scenario("format = 1\n[fades]\nwindows = [[15.0, 10.0]]\n", "inline").unwrap();
    let a = run_report(&spec, Some(1)).unwrap();
    let b = run_report(&spec, Some(2)).unwrap();
    assert_eq!(a.scenario.fade_windows, b.scenario.fade_windows);
    assert_ne!(a.holding.cwnd_trace, b.holding.cwnd_trace);
    assert!(a.improvement_ratio > 1.0 && b.improvement_ratio > 1.0);
}
