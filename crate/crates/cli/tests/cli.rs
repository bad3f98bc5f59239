use std::path::Path;
use std::process::{Command, Output};

use curation_cli::output::RunManifest;

fn curation(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curation")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = curation(&["run", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn missing_scenario_and_bad_flag_exit_2() {
    assert_eq!(code(&curation(&["run"])), 2);
    assert_eq!(code(&curation(&["run", "perfect-words", "--mode", "fuzzy"])), 2);
    assert_eq!(code(&curation(&["check", "T9"])), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = curation(&["run", "perfect-words", "--iterations", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn single_check_writes_one_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = curation(&["check", "t6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("verdicts.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("T6,true,"));
    let m = RunManifest::load(dir.path()).unwrap();
    assert!(m.mismatches(dir.path()).unwrap().is_empty());
}

#[test]
fn check_with_unfit_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("perfect.toml");
    std::fs::write(&cfg, curation_cli::RunConfig::preset("perfect-words").unwrap().to_toml()).unwrap();
    let o = curation(&["check", "T4", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_single_cell_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "scenarios = [\"partial-2d\"]\nshifts = []\nscalings = []\niterations = 20\n").unwrap();
    let out = dir.path().join("out");
    let o = curation(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out.join("utilities.csv")), 2);
}

#[test]
fn sweep_row_count_matches_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "scenarios = [\"perfect-2d\"]\nshifts = [1.0]\nscalings = [2.0]\niterations = 20\n").unwrap();
    let out = dir.path().join("out");
    let o = curation(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    // 3 owner reports by 3 public reports, for each agent.
    assert_eq!(csv_rows(&out.join("utilities.csv")), 18);
}

#[test]
fn bad_sweep_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "scenarios = [\"perfect-words\"]\n").unwrap();
    let o = curation(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn particle_run_manifest_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = curation(&["run", "disjoint-2d", "--mode", "particle", "--iterations", "5", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&dir.path().join("trajectory.csv")), 5);
    let m = RunManifest::load(dir.path()).unwrap();
    assert_eq!(m.seeds.root, 3);
    assert!(m.files.contains_key("points.csv") && m.files.contains_key("kde.csv"));
    assert!(m.mismatches(dir.path()).unwrap().is_empty());
    let cfg = m.config.unwrap();
    assert_eq!(curation_cli::RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
}
