use kpp_core::domain::{segment_mask, Field2D, GridSpec, MapMask};
use kpp_core::reference::{
    error_field, error_metrics, reference_radial_profile, rotation_asymmetry, ErrorMetrics,
    RadialField, ReferenceOptions,
};

use super::{
    ensure_out, integrate, parallel_stepper, solver_params, step_count, CapacitySource, Snapshots,
    Summary,
};
use crate::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::init::{Frame, InitShape};
use crate::io::{self, Snapshot};

const DEFAULT_N: usize = 201;
const DEFAULT_H: f64 = 0.1;
const DEFAULT_DX: f64 = 0.4;
const DEFAULT_T_END: f64 = 20.0;
const DEFAULT_INIT: &str = "gauss:0,0,1";

#[derive(Debug, Clone, PartialEq)]
pub struct RadialOutcome {
    pub field: Field2D,
    /// Against the radial reference (rotationally symmetric initial shapes only).
    pub metrics: Option<ErrorMetrics>,
    /// `||e - rot90(e)|| / ||e||` of the error field.
    pub asymmetry: Option<f64>,
    pub summary: Summary,
}

/// Radial reference matching a 2-D run of `duration` from `shape` on `grid`.
///
/// The radial domain is the largest disk around the shape's center whose
/// rim coincides with the nearest zero ghost line of the square.
pub fn radial_reference(shape: &InitShape, grid: &GridSpec, duration: f64) -> Result<Option<(RadialField, (f64, f64))>> {
    let Some((x, y, profile)) = shape.radial_profile() else {
        return Ok(None);
    };
    let frame = Frame::centered(grid);
    let center = frame.cell_of(x, y);
    let (c, r) = center;
    let reach = [c + 1.0, grid.nx as f64 - c, r + 1.0, grid.ny as f64 - r]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let nr = reach.floor() as usize;
    if nr < 3 {
        return Err(Error::Config("radial shape is centered too close to the edge".into()));
    }
    let field = reference_radial_profile(&*profile, nr, grid.dx, duration, &ReferenceOptions::default())?;
    Ok(Some((field, center)))
}

/// Rotationally symmetric spread on a fully habitable square with `K = 1`.
pub fn radial2d(cfg: &RunConfig) -> Result<RadialOutcome> {
    cfg.validate()?;
    let (h, dx) = cfg.resolved_h_dx(DEFAULT_H, DEFAULT_DX)?;
    let params = solver_params(cfg, h, dx)?;
    let nx = cfg.nx.unwrap_or(DEFAULT_N);
    let grid = GridSpec::new(nx, cfg.ny.unwrap_or(nx), dx)?;
    let shape: InitShape = cfg.init.as_deref().unwrap_or(DEFAULT_INIT).parse()?;
    let mut u = shape.build(grid, &Frame::centered(&grid))?;
    let t_end = cfg.t_end.unwrap_or(DEFAULT_T_END);
    let steps = step_count(cfg.t_start, t_end, h)?;
    ensure_out(cfg)?;

    let segments = segment_mask(&MapMask::all_land(grid));
    let mut stepper = parallel_stepper(cfg, params)?;
    let mut snaps = Snapshots::new(cfg, cfg.snapshot_every, true);
    snaps.offer(cfg.t_start, h, &u)?;
    let stats = integrate(&mut stepper, &mut u, &segments, &CapacitySource::Uniform, cfg.t_start, steps, |_, t, u| {
        snaps.offer(t, h, u).map(|_| ())
    })?;
    snaps.write("final", stats.t_final, &u)?;

    let mut summary = Summary::new(Scenario::Radial2d);
    summary.record(&stats);
    summary.metric("k", params.k());
    summary.metric("alternate_directions", params.alternate_directions());
    let (mut metrics, mut asymmetry) = (None, None);
    if cfg.reference {
        match radial_reference(&shape, &grid, stats.t_final - cfg.t_start)? {
            Some((reference, center)) => {
                let m = error_metrics(&u, &reference, center);
                let e = error_field(&u, &reference, center);
                summary.metric("eps_rms", format!("{:.6e}", m.rms));
                summary.metric("eps_max", format!("{:.6e}", m.max));
                if grid.nx == grid.ny {
                    let a = rotation_asymmetry(&e)?;
                    summary.metric("error_asymmetry", format!("{a:.6e}"));
                    asymmetry = Some(a);
                }
                let path = cfg.out.join("error.csv");
                io::write_snapshot_csv(&Snapshot { time: stats.t_final, field: e }, &path)?;
                summary.artifacts.push(path);
                metrics = Some(m);
            }
            None => log::warn!("initial shape is not rotationally symmetric; no reference comparison"),
        }
    }
    summary.artifacts.append(&mut snaps.written);
    summary.write(&cfg.out)?;
    Ok(RadialOutcome { field: u, metrics, asymmetry, summary })
}

/// Compares a saved snapshot against the radial reference for the configured
/// initial shape. Reads `cfg.snapshot`, or `final.csv` in the output directory.
pub fn error_metrics_scenario(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let path = cfg.snapshot.clone().unwrap_or_else(|| cfg.out.join("final.csv"));
    let snap = io::read_snapshot_csv(&path)?;
    let shape: InitShape = cfg.init.as_deref().unwrap_or(DEFAULT_INIT).parse()?;
    let grid = *snap.field.grid();
    let duration = snap.time - cfg.t_start;
    if !(duration >= 0.0) {
        return Err(Error::Config(format!("snapshot time {} precedes t_start {}", snap.time, cfg.t_start)));
    }
    let (reference, center) = radial_reference(&shape, &grid, duration)?
        .ok_or_else(|| Error::Config("error-metrics needs a gauss or disk initial shape".into()))?;
    let m = error_metrics(&snap.field, &reference, center);
    ensure_out(cfg)?;
    let mut summary = Summary::new(Scenario::ErrorMetrics);
    summary.t_final = snap.time;
    summary.min_u = snap.field.min();
    summary.max_u = snap.field.max();
    summary.metric("snapshot", path.display());
    summary.metric("eps_rms", format!("{:.6e}", m.rms));
    summary.metric("eps_max", format!("{:.6e}", m.max));
    summary.metric("cells", m.cells);
    if grid.nx == grid.ny {
        let a = rotation_asymmetry(&error_field(&snap.field, &reference, center))?;
        summary.metric("error_asymmetry", format!("{a:.6e}"));
    }
    let out = cfg.out.join("error_metrics.txt");
    io::write_key_values(&out, &summary.metrics)?;
    summary.artifacts.push(out);
    Ok(summary)
}
