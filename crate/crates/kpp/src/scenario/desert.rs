use kpp_core::domain::{segment_mask, Axis, CapacityFrame, GridSpec, MapMask};
use kpp_core::reference::{fit_slope, front_position_with_capacity, FrontTrace};

use super::{
    ensure_out, integrate, parallel_stepper, solver_params, step_count, CapacitySource, Snapshots,
    Summary,
};
use crate::config::{RunConfig, Scenario};
use crate::error::Result;
use crate::init::{Frame, InitShape};
use crate::io;

const DEFAULT_NX: usize = 201;
const DEFAULT_NY: usize = 101;
const DEFAULT_H: f64 = 0.125;
const DEFAULT_DX: f64 = 0.4;
const DEFAULT_T_END: f64 = 50.0;

/// Desert run with the given capacity band and initial strip; other settings at defaults.
pub fn desert_scenario_builder(
    f_r: f64,
    x_low: f64,
    x_high: f64,
    strip_center: f64,
    strip_rms: f64,
) -> RunConfig {
    let mut cfg = RunConfig::new(Scenario::Desert);
    cfg.desert.f_r = f_r;
    cfg.desert.x_low = x_low;
    cfg.desert.x_high = x_high;
    cfg.desert.strip_center = strip_center;
    cfg.desert.strip_rms = strip_rms;
    cfg
}

/// Front velocity over the part of the centerline trace inside one zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneVelocity {
    pub name: &'static str,
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    /// Least-squares slope of `x_half(t)`; `None` with fewer than 2 samples.
    pub velocity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesertOutcome {
    /// Leading `u = K/2` crossing along the middle row, in centered coordinates.
    pub trace: FrontTrace,
    /// Upstream, desert and downstream zones, each shrunk by the wall margin.
    pub zones: Vec<ZoneVelocity>,
    pub min_u: f64,
    /// First step after which some `u < 0`.
    pub first_negative_step: Option<u64>,
    pub summary: Summary,
}

/// Front crossing a band of low capacity `f_r` for `x_low < x < x_high`.
pub fn desert(cfg: &RunConfig) -> Result<DesertOutcome> {
    cfg.validate()?;
    let d = cfg.desert;
    let (h, dx) = cfg.resolved_h_dx(DEFAULT_H, DEFAULT_DX)?;
    let params = solver_params(cfg, h, dx)?;
    let grid = GridSpec::new(cfg.nx.unwrap_or(DEFAULT_NX), cfg.ny.unwrap_or(DEFAULT_NY), dx)?;
    let frame = Frame::centered(&grid);
    let in_desert = |col: usize| {
        let x = frame.x(col);
        x > d.x_low && x < d.x_high
    };
    let capacity = CapacityFrame::new(
        grid,
        cfg.t_start,
        (0..grid.cells()).map(|i| if in_desert(i % grid.nx) { d.f_r } else { 1.0 }).collect(),
    )?;
    let shape = match cfg.init.as_deref() {
        Some(spec) => spec.parse()?,
        None => InitShape::Strip { x: d.strip_center, rms: d.strip_rms },
    };
    let mut u = shape.build(grid, &frame)?;
    let t_end = cfg.t_end.unwrap_or(DEFAULT_T_END);
    let steps = step_count(cfg.t_start, t_end, h)?;
    ensure_out(cfg)?;

    let segments = segment_mask(&MapMask::all_land(grid));
    let mut stepper = parallel_stepper(cfg, params)?;
    let mid = grid.ny / 2;
    let k_line: Vec<f64> = (0..grid.nx).map(|col| capacity.get(mid, col)).collect();
    let origin = frame.x(0);
    let mut trace = FrontTrace::new(1.0);
    let mut first_negative_step = None;
    let mut snaps = Snapshots::new(cfg, cfg.snapshot_every, true);
    snaps.offer(cfg.t_start, h, &u)?;
    let source = CapacitySource::Static(capacity);
    let stats = integrate(&mut stepper, &mut u, &segments, &source, cfg.t_start, steps, |s, t, u| {
        if first_negative_step.is_none() && u.min() < 0.0 {
            first_negative_step = Some(s);
        }
        if let Some(x) = front_position_with_capacity(&u.line(Axis::X, mid), &k_line, dx) {
            trace.push(t, origin + x)?;
        }
        snaps.offer(t, h, u).map(|_| ())
    })?;
    snaps.write("final", stats.t_final, &u)?;

    let m = d.margin;
    let (x_min, x_max) = (frame.x(0), frame.x(grid.nx - 1));
    let bounds = [
        ("upstream", x_min + m, d.x_low - m),
        ("desert", d.x_low + m, d.x_high - m),
        ("downstream", d.x_high + m, x_max - m),
    ];
    let zones: Vec<ZoneVelocity> = bounds
        .into_iter()
        .map(|(name, from, to)| {
            let inside = trace.samples().iter().copied().filter(move |&(_, x)| x >= from && x <= to);
            ZoneVelocity { name, from, to, samples: inside.clone().count(), velocity: fit_slope(inside) }
        })
        .collect();

    let mut summary = Summary::new(Scenario::Desert);
    summary.record(&stats);
    summary.metric("f_r", d.f_r);
    summary.metric("regularize", params.regularize());
    summary.metric(
        "first_negative_step",
        first_negative_step.map_or_else(|| "none".to_string(), |s| s.to_string()),
    );
    for z in &zones {
        let v = z.velocity.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
        summary.metric(&format!("velocity_{}[{:.1},{:.1}]", z.name, z.from, z.to), v);
    }
    let path = cfg.out.join("trace.csv");
    io::write_front_trace(&trace, &path)?;
    summary.artifacts.push(path);
    summary.artifacts.append(&mut snaps.written);
    summary.write(&cfg.out)?;
    Ok(DesertOutcome { trace, zones, min_u: stats.min_u, first_negative_step, summary })
}
