//! File-based pipeline: determinism, validation order and format versions.

use std::fs;
use std::path::Path;
use std::process::Command;

use polartomo::io::{self, ExperimentConfig, GridCompletion, MANIFEST_FILE};
use polartomo::pipeline::{cmd_all, cmd_fit, cmd_simulate, WorkDir};
use polartomo::states::StateKind;
use polartomo::TomoError;

fn small(kind: StateKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::standard(kind);
    cfg.acquisition.n_pulses = 1000;
    cfg.volume.resolution = 21;
    cfg
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn volume_bytes(root: &Path) -> (Vec<u8>, Vec<u8>) {
    (fs::read(root.join("volume.toml")).unwrap(), fs::read(root.join("volume.f64")).unwrap())
}

#[test]
fn same_seed_gives_identical_files_for_any_thread_count() {
    let cfg = small(StateKind::PhiMinus);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    in_pool(1, || cmd_all(&cfg, a.path(), false)).unwrap();
    in_pool(4, || cmd_all(&cfg, b.path(), false)).unwrap();
    assert_eq!(volume_bytes(a.path()), volume_bytes(b.path()));
    for f in ["tomograms.toml", "analysis/report.json", "analysis/isosurface.ply", "signal/pulses_0100.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }

    let mut other = cfg.clone();
    other.acquisition.seed = 2;
    let c = tempfile::tempdir().unwrap();
    cmd_all(&other, c.path(), false).unwrap();
    assert_ne!(volume_bytes(a.path()).1, volume_bytes(c.path()).1);
}

#[test]
fn invalid_config_writes_nothing() {
    let mut cfg = small(StateKind::PhiMinus);
    cfg.acquisition.n_pulses = 0;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let err = cmd_simulate(&cfg, &out).unwrap_err();
    assert!(matches!(err, TomoError::InvalidParameter { name: "acquisition.n_pulses", .. }));
    assert_eq!(err.exit_code(), 1);
    assert!(!out.exists());
}

#[test]
fn readers_reject_unknown_versions() {
    let cfg = small(StateKind::PsiMinus);
    let dir = tempfile::tempdir().unwrap();
    cmd_simulate(&cfg, dir.path()).unwrap();
    let wd = WorkDir::new(dir.path());
    let manifest = wd.signal().join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest).unwrap().replace("format_version = 1", "format_version = 7");
    fs::write(&manifest, text).unwrap();
    let err = cmd_fit(&wd.signal(), None, GridCompletion::None, false, &wd.tomograms()).unwrap_err();
    assert!(matches!(err, TomoError::FormatVersion { found: 7, .. }), "{err}");
    assert_eq!(err.exit_code(), 3);

    let csv = wd.signal().join("pulses_0000.csv");
    let text = fs::read_to_string(&csv).unwrap().replacen("format_version=1", "format_version=2", 1);
    fs::write(&csv, text).unwrap();
    assert!(matches!(io::read_pulses(&csv), Err(TomoError::FormatVersion { .. })));
}

#[test]
fn stage_outputs_carry_versions_and_expected_columns() {
    let cfg = small(StateKind::PhiMinus);
    let dir = tempfile::tempdir().unwrap();
    cmd_all(&cfg, dir.path(), false).unwrap();
    let root = dir.path();
    let csv = fs::read_to_string(root.join("signal/pulses_0000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# format_version=1"));
    assert_eq!(lines.next(), Some("pulse_index,d1,d2"));
    for f in ["tomograms.toml", "volume.toml", "config.toml", "signal/manifest.toml", "noise/manifest.toml"] {
        let text = fs::read_to_string(root.join(f)).unwrap();
        assert!(text.contains("format_version = 1"), "{f}");
    }
    let ply = fs::read_to_string(root.join("analysis/isosurface.ply")).unwrap();
    assert!(ply.starts_with("ply\nformat ascii 1.0\n"));
    assert!(ply.contains("format_version 1"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(root.join("analysis/report.json")).unwrap()).unwrap();
    assert_eq!(json["format_version"], 1);
    assert!(json["report"]["squeezed_axes"].is_array());
    assert_eq!(json["report"]["axis_stds"].as_array().unwrap().len(), 3);
    for s in ["s1", "s2", "s3"] {
        let slice = fs::read_to_string(root.join(format!("analysis/slice_{s}.csv"))).unwrap();
        assert!(slice.starts_with("# format_version=1"));
    }
    let f64_len = fs::metadata(root.join("volume.f64")).unwrap().len();
    assert_eq!(f64_len, 21 * 21 * 21 * 8);
}

fn tomo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tomo")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg_path = root.join("cfg.toml");
    let out = root.join("run");
    let out_s = out.to_str().unwrap();
    small(StateKind::PsiMinus).save(&cfg_path).unwrap();
    let cfg_s = cfg_path.to_str().unwrap();

    let ok = tomo(&["all", "--config", cfg_s, "--out", out_s, "--threads", "2", "--seed", "5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("squeezed axes           S1, S2, S3"));

    let analyze = tomo(&["analyze", "--config", cfg_s, "--out", out_s, "--threshold-fraction", "0.3", "--display-scale-std", "10"]);
    assert_eq!(analyze.status.code(), Some(0));
    let report = fs::read_to_string(out.join("analysis/report.json")).unwrap();
    assert!(report.contains("\"threshold_fraction\": 0.3"));

    let bad = tomo(&["simulate", "--config", cfg_s, "--out", out_s, "--threshold-fraction", "1.5"]);
    assert_eq!(bad.status.code(), Some(1));

    assert_eq!(tomo(&["all", "--no-such-flag"]).status.code(), Some(1));

    let missing = tomo(&["fit", "--config", root.join("nope.toml").to_str().unwrap(), "--out", out_s]);
    assert_eq!(missing.status.code(), Some(3));

    let mut weak = small(StateKind::PsiMinus);
    weak.state.mean_photons = 1.0;
    weak.state.electronic_noise_std = 1e-9;
    weak.save(&cfg_path).unwrap();
    let weak_out = root.join("weak");
    let failed = tomo(&["all", "--config", cfg_s, "--out", weak_out.to_str().unwrap()]);
    assert_eq!(failed.status.code(), Some(2), "{}", String::from_utf8_lossy(&failed.stderr));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("theta"));
}
