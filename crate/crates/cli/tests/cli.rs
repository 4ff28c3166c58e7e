use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn squidchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squidchain")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, from: &str, to: &str) -> String {
    let text = stdout(&squidchain(&["preset", "fig1"]));
    assert!(text.contains(from));
    let path = dir.join("scenario.toml");
    fs::write(&path, text.replacen(from, to, 1)).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn preset_prints_parseable_text() {
    let out = squidchain(&["preset", "fig1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("[chain]") && text.contains("[bath]") && text.contains("[run]"));
}

#[test]
fn rates_prints_network() {
    let dir = tempdir().unwrap();
    let out = squidchain(&["rates", "--preset", "fig3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("network components"));
    assert!(dir.path().join("rates.txt").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&squidchain(&["rates", "--preset", "fig9"])), 1);
    assert_eq!(code(&squidchain(&["run", "--preset", "fig1", "--bogus"])), 1);
    assert_eq!(code(&squidchain(&["run", "--out", "x"])), 1);
    assert_eq!(code(&squidchain(&[])), 1);
    assert_eq!(code(&squidchain(&["--help"])), 0);
    assert_eq!(code(&squidchain(&["--version"])), 0);
    let dir = tempdir().unwrap();
    let bad = write_config(dir.path(), "current_A = 3e-6", "current_A = -1");
    let out = squidchain(&["rates", "--config", &bad]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("current_A"));
}

#[test]
fn intermediate_regime_exits_two() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), "radius_m = 1e-5", "radius_m = 1e-6");
    let out = squidchain(&["run", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("intermediate"));
}

#[test]
fn run_writes_trajectory_and_report() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().join("fig3");
    let out = squidchain(&["run", "--preset", "fig3", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("time_ns,pop_1,pop_2,pop_3,pop_4,"));
    assert!(out_dir.join("report.txt").exists());
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempdir().unwrap();
    let out = squidchain(&[
        "sweep", "--preset", "fig3", "--axis", "bath.temperature_GHz", "--values", "0.2,0.4",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dirs = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(dirs, 2);
}
