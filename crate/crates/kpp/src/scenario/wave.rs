use kpp_core::domain::{Field2D, GridSpec};
use kpp_core::kernels::step_1d;
use kpp_core::reference::{
    front_position, mean_front_velocity, profile_metrics, reference_1d, ErrorMetrics, FrontTrace,
    ReferenceOptions,
};

use super::{ensure_out, solver_params, step_count, Snapshots, Summary};
use crate::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::init::{Frame, InitShape};
use crate::io;

const DEFAULT_N: usize = 401;
const DEFAULT_H: f64 = 0.2;
const DEFAULT_DX: f64 = 0.2;
const DEFAULT_T_END: f64 = 30.0;
const DEFAULT_INIT: &str = "step:20";
const DEFAULT_SNAPSHOT_EVERY: f64 = 10.0;
const DEFAULT_WINDOW: (f64, f64) = (10.0, 30.0);

#[derive(Debug, Clone, PartialEq)]
pub struct WaveOutcome {
    /// Leading `u = 1/2` crossing after every step.
    pub trace: FrontTrace,
    /// Profiles at snapshot times and at the end.
    pub profiles: Vec<(f64, Vec<f64>)>,
    /// Differences to the fine-grid reference at the profile times.
    pub comparisons: Vec<(f64, ErrorMetrics)>,
    /// Least-squares front velocity over the configured window.
    pub velocity: Option<f64>,
    pub summary: Summary,
}

/// 1-D front on `x_i = i dx` with `u = 0` beyond both ends.
pub fn wave1d(cfg: &RunConfig) -> Result<WaveOutcome> {
    cfg.validate()?;
    let (h, dx) = cfg.resolved_h_dx(DEFAULT_H, DEFAULT_DX)?;
    let params = solver_params(cfg, h, dx)?;
    let n = cfg.nx.unwrap_or(DEFAULT_N);
    if cfg.ny.is_some_and(|ny| ny != 1) {
        return Err(Error::Config("wave1d runs on a single row (ny = 1)".into()));
    }
    let grid = GridSpec::new(n, 1, dx)?;
    let shape: InitShape = cfg.init.as_deref().unwrap_or(DEFAULT_INIT).parse()?;
    let u0 = shape.build(grid, &Frame::left_edge(&grid))?.into_values();
    let t_end = cfg.t_end.unwrap_or(DEFAULT_T_END);
    let steps = step_count(cfg.t_start, t_end, h)?;
    ensure_out(cfg)?;
    let every = cfg.snapshot_every.or(Some(DEFAULT_SNAPSHOT_EVERY));
    let mut snaps = Snapshots::new(cfg, every, false);

    let mut u = vec![0.0; n + 2];
    u[1..=n].copy_from_slice(&u0);
    let mut trace = FrontTrace::new(1.0);
    let mut profiles = Vec::new();
    let (mut min_u, mut max_u) = extremes(&u0);
    snaps.offer(cfg.t_start, h, &Field2D::from_values(grid, u0.clone())?)?;
    for s in 0..steps {
        u = step_1d(&u, &params)?;
        let t = cfg.t_start + (s + 1) as f64 * h;
        let interior = &u[1..=n];
        if interior.iter().any(|v| !v.is_finite()) {
            return Err(kpp_core::Error::Diverged { step: s }.into());
        }
        let (lo, hi) = extremes(interior);
        min_u = min_u.min(lo);
        max_u = max_u.max(hi);
        if let Some(x) = front_position(interior, 1.0, dx) {
            trace.push(t, x)?;
        }
        let last = s + 1 == steps;
        if snaps.due(t, h) || last {
            let field = Field2D::from_values(grid, interior.to_vec())?;
            snaps.offer(t, h, &field)?;
            if last {
                snaps.write("final", t, &field)?;
            }
            profiles.push((t, interior.to_vec()));
        }
    }

    let mut comparisons = Vec::new();
    if cfg.reference {
        let opts = ReferenceOptions::default();
        for (t, profile) in &profiles {
            let reference = reference_1d(&u0, dx, t - cfg.t_start, &opts)?;
            comparisons.push((*t, profile_metrics(profile, &reference)));
        }
    }
    let window = (
        cfg.window_start.unwrap_or(DEFAULT_WINDOW.0),
        cfg.window_end.unwrap_or(DEFAULT_WINDOW.1),
    );
    let velocity = mean_front_velocity(&trace, window.0, window.1);

    let mut summary = Summary::new(Scenario::Wave1d);
    summary.t_final = cfg.t_start + steps as f64 * h;
    summary.steps = steps;
    summary.min_u = min_u;
    summary.max_u = max_u;
    summary.metric("k", params.k());
    match velocity {
        Some(v) => summary.metric(&format!("front_velocity[{},{}]", window.0, window.1), format!("{v:.6}")),
        None => summary.metric("front_velocity", "no front in window"),
    }
    let trace_path = cfg.out.join("trace.csv");
    io::write_front_trace(&trace, &trace_path)?;
    summary.artifacts.push(trace_path);
    if !comparisons.is_empty() {
        let mut lines = vec![("columns".to_string(), "t rms max cells".to_string())];
        for (t, m) in &comparisons {
            summary.metric(&format!("reference_rms@{t}"), format!("{:.4e}", m.rms));
            lines.push((format!("t={t}"), format!("{:.16e} {:.16e} {}", m.rms, m.max, m.cells)));
        }
        let path = cfg.out.join("comparison.txt");
        io::write_key_values(&path, &lines)?;
        summary.artifacts.push(path);
    }
    summary.artifacts.append(&mut snaps.written);
    summary.write(&cfg.out)?;
    Ok(WaveOutcome { trace, profiles, comparisons, velocity, summary })
}

fn extremes(u: &[f64]) -> (f64, f64) {
    u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
