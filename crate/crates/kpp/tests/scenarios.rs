use std::fs;
use std::path::Path;

use kpp::config::{RunConfig, Scenario};
use kpp::io::{read_snapshot_csv, write_grid_file};
use kpp::kpp_core::domain::GridSpec;
use kpp::scenario::{self, desert, map_run, radial2d, wave1d};

fn config(scenario: Scenario, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::new(scenario);
    cfg.out = out.to_path_buf();
    cfg.threads = Some(2);
    cfg
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv") && p.file_name().unwrap() != "trace.csv")
        .collect();
    v.sort();
    v
}

#[test]
fn wave1d_from_zero_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Scenario::Wave1d, dir.path());
    cfg.init = Some("zero".into());
    cfg.t_end = Some(4.0);
    cfg.snapshot_every = Some(1.0);
    cfg.reference = false;
    let out = wave1d(&cfg).unwrap();
    assert!(out.trace.is_empty());
    let snaps = csv_files(dir.path());
    assert_eq!(snaps.len(), 6, "{snaps:?}");
    for p in snaps {
        assert!(read_snapshot_csv(&p).unwrap().field.values().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn wave1d_front_moves_right() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Scenario::Wave1d, dir.path());
    cfg.nx = Some(201);
    cfg.init = Some("step:10".into());
    cfg.t_end = Some(10.0);
    cfg.window_start = Some(4.0);
    cfg.window_end = Some(10.0);
    let out = wave1d(&cfg).unwrap();
    let v = out.velocity.unwrap();
    assert!(v > 1.0 && v < 1.5, "{v}");
    assert!(out.comparisons.iter().all(|(_, m)| m.rms < 5e-2));
    assert!(out.summary.max_u <= 1.0 + 1e-9);
}

#[test]
fn radial_run_and_error_metrics_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Scenario::Radial2d, dir.path());
    cfg.nx = Some(41);
    cfg.t_end = Some(3.0);
    let out = radial2d(&cfg).unwrap();
    let m = out.metrics.unwrap();
    assert!(m.max >= m.rms && m.rms < 2e-2, "{m:?}");

    cfg.scenario = Scenario::ErrorMetrics;
    let summary = scenario::run(&cfg).unwrap();
    let get = |k: &str| summary.metrics.iter().find(|(key, _)| key == k).unwrap().1.clone();
    assert_eq!(get("eps_rms"), format!("{:.6e}", m.rms));
    assert_eq!(get("eps_max"), format!("{:.6e}", m.max));
}

#[test]
fn desert_sign_change_needs_regularization_off() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Scenario::Desert, dir.path());
    // narrow strips lose too much through the y walls to saturate; 51 rows is enough
    cfg.ny = Some(51);
    cfg.t_end = Some(15.0);
    cfg.snapshot_every = Some(100.0);
    let on = desert(&cfg).unwrap();
    assert!(on.min_u >= -1e-12 && on.first_negative_step.is_none());
    cfg.regularize = false;
    let off = desert(&cfg).unwrap();
    assert!(off.min_u < 0.0 && off.first_negative_step.is_some());
}

fn write_map_inputs(dir: &Path) -> std::path::PathBuf {
    let g = GridSpec::new(6, 4, 0.5).unwrap();
    let land = |i: usize| i % 6 != 2 || i / 6 == 3;
    let k = |scale: f64| (0..24).map(|i| if land(i) { scale * (0.5 + (i % 5) as f64 / 10.0) } else { 0.0 }).collect::<Vec<_>>();
    write_grid_file(dir.join("k0.grid"), &g, &k(1.0)).unwrap();
    write_grid_file(dir.join("k1.grid"), &g, &k(0.8)).unwrap();
    let mask: Vec<f64> = (0..24).map(|i| if land(i) { 1.0 } else { 0.0 }).collect();
    write_grid_file(dir.join("mask.grid"), &g, &mask).unwrap();
    let manifest = dir.join("frames.txt");
    fs::write(&manifest, "0 k0.grid\n2 k1.grid\n").unwrap();
    manifest
}

#[test]
fn map_run_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_map_inputs(dir.path());
    let mut cfg = config(Scenario::MapRun, &dir.path().join("out"));
    cfg.frames = Some(manifest);
    cfg.mask = Some(dir.path().join("mask.grid"));
    cfg.t_end = Some(2.0);
    cfg.init = Some("seed:0,0,0.5".into());
    let out = map_run(&cfg).unwrap();
    assert_eq!(out.segments.row_counts(), vec![2, 2, 2, 1]);
    assert!(out.field.get(0, 2) == 0.0 && out.field.get(1, 2) == 0.0);
    assert!(out.field.get(0, 3) > 0.0, "spread reaches the east side through row 3");

    cfg.t_end = Some(3.0);
    assert!(map_run(&cfg).is_err(), "run beyond the last frame");
}

#[test]
fn segment_debug_lists_inclusive_segments() {
    let dir = tempfile::tempdir().unwrap();
    write_map_inputs(dir.path());
    let mut cfg = config(Scenario::SegmentDebug, &dir.path().join("out"));
    cfg.mask = Some(dir.path().join("mask.grid"));
    scenario::run(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("out/segments.txt")).unwrap();
    assert!(text.contains("row 0: 2 [0, 1] [3, 5]"), "{text}");
    assert!(text.contains("row 3: 1 [0, 5]"));
    assert!(text.contains("column 2: 1 [3, 3]"));
}

#[test]
fn map_helpers_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    for s in [Scenario::SmoothMap, Scenario::InterpPreview] {
        let cfg = config(s, &dir.path().join(s.name()));
        let summary = scenario::run(&cfg).unwrap();
        assert!(summary.artifacts.iter().all(|p| p.exists()));
    }
    let csv = fs::read_to_string(dir.path().join("interp-preview/interp.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows[0][1..4], [0.0, 0.0, 0.0]);
    assert_eq!(rows.last().unwrap()[1..4], [1.0, 1.0, 1.0]);
    assert!((rows[rows.len() / 2][2] - 0.5).abs() < 1e-15);
}

#[test]
fn invalid_configs_fail_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Scenario::Radial2d, &dir.path().join("never"));
    cfg.h = Some(-0.1);
    assert!(scenario::run(&cfg).is_err());
    assert!(!dir.path().join("never").exists());
    let parsed = RunConfig::parse("scenario = desert\nfr = 2\n", Path::new("c.cfg"), None).unwrap();
    assert!(parsed.validate().is_err());
    let err = RunConfig::parse("scenario = desert\nfr = lots\n", Path::new("c.cfg"), None).unwrap_err();
    assert!(err.to_string().contains("c.cfg:2"), "{err}");
}
