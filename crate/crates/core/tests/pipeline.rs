use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use aquifer_sim::pipeline::{checkpoint_path, read_checkpoint, run, ExportFormat, RunConfig, RunOptions};
use aquifer_sim::Error;

fn small_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/small.cfg")
}

fn small_config() -> RunConfig {
    RunConfig::load(&small_config_path()).expect("small config")
}

fn opts(dir: &Path, stages: Vec<u8>) -> RunOptions {
    RunOptions { out_dir: dir.to_path_buf(), checkpoint_dir: None, export: None, stages }
}

fn simulate() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_simulate"));
    cmd.env("RUST_LOG", "error").stderr(Stdio::null());
    cmd
}

#[test]
fn staged_runs_match_a_single_run() {
    let cfg = small_config();
    let all = tempfile::tempdir().unwrap();
    let summaries = run(&cfg, &opts(all.path(), vec![1, 2, 3, 4])).unwrap();
    assert_eq!(summaries.len(), 4);
    assert!(summaries.iter().all(|s| s.closure <= cfg.audit_tolerance));

    let staged = tempfile::tempdir().unwrap();
    for stage in 1..=4 {
        run(&cfg, &opts(staged.path(), vec![stage])).unwrap();
    }
    for stage in 1..=4 {
        let a = std::fs::read(checkpoint_path(all.path(), stage)).unwrap();
        let b = std::fs::read(checkpoint_path(staged.path(), stage)).unwrap();
        assert!(a == b, "stage {stage} checkpoint differs between a full and a staged run");
        let audit = std::fs::read_to_string(all.path().join(format!("audit_stage{stage}.txt"))).unwrap();
        assert!(audit.contains("status = PASS"), "{audit}");
    }

    // stage bookkeeping carried in the final checkpoint
    let (m, state) = read_checkpoint(&checkpoint_path(all.path(), 4)).unwrap();
    assert_eq!(m.stage, 4);
    assert_eq!(state.stage, 4);
    assert!(state.ledger.contains_key("monitor.pre_injection"));
    assert!(state.ledger_value("nzvi.injected") > 0.0);
}

#[test]
fn later_stage_without_checkpoint_is_exit_code_3() {
    let cfg = small_config();
    let empty = tempfile::tempdir().unwrap();
    let err = run(&cfg, &opts(empty.path(), vec![3])).unwrap_err();
    assert!(matches!(err, Error::MissingCheckpoint(_)), "{err}");
    assert_eq!(err.exit_code(), 3);

    let status = simulate()
        .arg("--config")
        .arg(small_config_path())
        .args(["--stage", "2", "--out"])
        .arg(empty.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn checkpoint_from_another_directory_and_seed_mismatch_warns_only() {
    let cfg = small_config();
    let first = tempfile::tempdir().unwrap();
    run(&cfg, &opts(first.path(), vec![1])).unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = RunOptions { checkpoint_dir: Some(first.path().to_path_buf()), ..opts(second.path(), vec![2]) };
    run(&cfg.clone().with_seed(99), &o).unwrap();
    assert!(checkpoint_path(second.path(), 2).exists());
}

#[test]
fn mismatched_grid_is_rejected() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    run(&cfg, &opts(dir.path(), vec![1])).unwrap();
    let mut other = cfg.clone();
    other.geometry.dx = 0.5;
    let err = run(&other, &opts(dir.path(), vec![2])).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn cli_exit_codes_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    // usage error
    let s = simulate().args(["--stage", "7", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(s.code(), Some(2));
    let s = simulate().arg("--bogus").status().unwrap();
    assert_eq!(s.code(), Some(2));
    // unknown configuration key
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[domain]\nwidht = 3 m\n").unwrap();
    let s = simulate().arg("--config").arg(&bad).args(["--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(s.code(), Some(2));
    // unitless physical quantity
    std::fs::write(&bad, "[domain]\nwidth = 3\n").unwrap();
    let s = simulate().arg("--config").arg(&bad).args(["--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(s.code(), Some(2));

    let out = dir.path().join("run");
    let s = simulate()
        .arg("--config")
        .arg(small_config_path())
        .args(["--stage", "1", "--threads", "1", "--export", "csv", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(s.success());
    assert!(out.join("stage1.ckpt").exists());
    assert!(out.join("stage1_series.csv").exists());
    assert!(out.join("stage1_summary.txt").exists());
    assert!(out.join("snapshots/stage1_final.csv").exists());
    let series = std::fs::read_to_string(out.join("stage1_series.csv")).unwrap();
    assert!(series.starts_with("time_d,napl_mass"));
}

#[test]
fn export_format_names() {
    assert_eq!("vtk".parse::<ExportFormat>().unwrap(), ExportFormat::Vtk);
    assert_eq!("csv".parse::<ExportFormat>().unwrap(), ExportFormat::Csv);
    assert!("hdf5".parse::<ExportFormat>().is_err());
}
