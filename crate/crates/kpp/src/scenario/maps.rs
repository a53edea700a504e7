use std::path::Path;

use kpp_core::capacity::{capacity_at, sigmoid_weight, smooth_frame, SigmoidSchedule, SmoothingFilter};
use kpp_core::domain::{segment_mask, Axis, CapacityFrame, Field2D, GridSpec, MapMask, Segmentation};

use super::{
    ensure_out, integrate, parallel_stepper, solver_params, step_count, CapacitySource, Snapshots,
    Summary,
};
use crate::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::init::{Frame, InitShape};
use crate::io::{self, Snapshot};
use crate::synthetic;

const DEFAULT_H: f64 = 0.125;
const DEFAULT_T_END: f64 = 30.0;
const DEFAULT_SMOOTH_L: usize = 3;
const PREVIEW_SAMPLES: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct MapOutcome {
    pub field: Field2D,
    pub segments: Segmentation,
    pub summary: Summary,
}

/// Capacity input: a single grid file or a frame manifest.
enum FrameInput {
    Single(CapacityFrame),
    Schedule(SigmoidSchedule),
}

/// A grid file starts with a three-field header; a manifest line has two fields.
fn read_frames(path: &Path, nu: f64, t_start: f64) -> Result<FrameInput> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::parse(path, 1, "empty capacity input"))?;
    if first.split_whitespace().count() == 3 {
        Ok(FrameInput::Single(io::load_capacity(path, t_start)?))
    } else {
        Ok(FrameInput::Schedule(io::load_schedule(path, nu)?))
    }
}

fn check_dx(cfg: &RunConfig, grid: &GridSpec) -> Result<()> {
    match cfg.dx {
        Some(dx) if dx != grid.dx => Err(Error::Config(format!(
            "--dx {dx} disagrees with the map spacing {}",
            grid.dx
        ))),
        _ => Ok(()),
    }
}

/// Mask and capacity for map scenarios: from files when given, synthetic otherwise.
fn map_inputs(cfg: &RunConfig, t_end: f64) -> Result<(MapMask, CapacitySource)> {
    let file_mask = cfg.mask.as_ref().map(io::load_mask).transpose()?;
    let frames = cfg.frames.as_ref().map(|p| read_frames(p, cfg.nu, cfg.t_start)).transpose()?;
    let (mask, source) = match frames {
        Some(input) => {
            let first = match &input {
                FrameInput::Single(f) => f,
                FrameInput::Schedule(s) => &s.frames()[0],
            };
            let mask = match file_mask {
                Some(m) => {
                    m.grid().ensure_matches(first.grid())?;
                    m
                }
                None => MapMask::from_capacity(first),
            };
            let source = match input {
                FrameInput::Single(f) => CapacitySource::Static(f),
                FrameInput::Schedule(s) => CapacitySource::Schedule(s),
            };
            (mask, source)
        }
        None => {
            let mask = match file_mask {
                Some(m) => m,
                None => {
                    let dx = cfg.dx.unwrap_or(synthetic::DX);
                    let g = GridSpec::new(
                        cfg.nx.unwrap_or(synthetic::NX),
                        cfg.ny.unwrap_or(synthetic::NY),
                        dx,
                    )?;
                    synthetic::mask(g)
                }
            };
            let frames = vec![
                synthetic::early_frame(&mask, cfg.t_start)?,
                synthetic::late_frame(&mask, t_end)?,
            ];
            (mask, CapacitySource::Schedule(SigmoidSchedule::new(frames, cfg.nu)?))
        }
    };
    match &source {
        CapacitySource::Static(f) => mask.check_capacity(f)?,
        CapacitySource::Schedule(s) => {
            for f in s.frames() {
                mask.check_capacity(f)?;
            }
        }
        CapacitySource::Uniform => {}
    }
    check_dx(cfg, mask.grid())?;
    let source = match (cfg.smooth_l, source) {
        (Some(l), CapacitySource::Static(f)) => {
            CapacitySource::Static(smooth_frame(&f, &mask, &SmoothingFilter::new(l)?)?)
        }
        (Some(l), CapacitySource::Schedule(s)) => {
            let filter = SmoothingFilter::new(l)?;
            CapacitySource::Schedule(s.map_frames(|f| smooth_frame(&f, &mask, &filter))?)
        }
        (_, s) => s,
    };
    Ok((mask, source))
}

fn map_mask(cfg: &RunConfig) -> Result<MapMask> {
    let (mask, _) = map_inputs(cfg, cfg.t_end.unwrap_or(cfg.t_start + 1.0))?;
    Ok(mask)
}

/// Dispersal over a masked map with time-dependent capacity.
pub fn map_run(cfg: &RunConfig) -> Result<MapOutcome> {
    cfg.validate()?;
    let t_end = cfg.t_end.unwrap_or(cfg.t_start + DEFAULT_T_END);
    let (mask, capacity) = map_inputs(cfg, t_end)?;
    let grid = *mask.grid();
    // Physical units may rescale the spacing; the map itself only fixes the cell layout.
    let (h, dx) = cfg.resolved_h_dx(DEFAULT_H, grid.dx)?;
    let params = solver_params(cfg, h, dx)?;
    if let CapacitySource::Schedule(s) = &capacity {
        if s.frames().len() > 1 && (cfg.t_start < s.start() || t_end > s.end()) {
            return Err(Error::Config(format!(
                "run [{}, {t_end}] leaves the frame range [{}, {}]",
                cfg.t_start,
                s.start(),
                s.end()
            )));
        }
    }
    let shape = match cfg.init.as_deref() {
        Some(spec) => spec.parse()?,
        None => {
            let (row, col) = synthetic::seed_cell(&mask)
                .ok_or_else(|| Error::Config("map has no habitable cell".into()))?;
            InitShape::Seed { row, col, value: 1.0 }
        }
    };
    let mut u = shape.build(grid, &Frame::centered(&grid))?;
    let cleared = u.apply_mask(&mask)?;
    if cleared > 0 {
        log::warn!("initial population on {cleared} water cells set to 0");
    }
    let steps = step_count(cfg.t_start, t_end, h)?;
    ensure_out(cfg)?;

    let segments = segment_mask(&mask);
    let mut stepper = parallel_stepper(cfg, params)?;
    let every = cfg.snapshot_every.or(Some((t_end - cfg.t_start) / 3.0));
    let mut snaps = Snapshots::new(cfg, every, true);
    snaps.offer(cfg.t_start, h, &u)?;
    let stats = integrate(&mut stepper, &mut u, &segments, &capacity, cfg.t_start, steps, |_, t, u| {
        snaps.offer(t, h, u).map(|_| ())
    })?;
    snaps.write("final", stats.t_final, &u)?;

    let mut summary = Summary::new(Scenario::MapRun);
    summary.record(&stats);
    summary.metric("grid", format!("{}x{} dx={}", grid.nx, grid.ny, grid.dx));
    summary.metric("land_cells", mask.land_count());
    summary.metric("row_segments", segments.total_segments(Axis::X));
    summary.metric("column_segments", segments.total_segments(Axis::Y));
    summary.metric("population", format!("{:.16e}", u.values().iter().sum::<f64>() * dx * dx));
    summary.artifacts.append(&mut snaps.written);
    summary.write(&cfg.out)?;
    Ok(MapOutcome { field: u, segments, summary })
}

/// Lists the row and column segments of the map mask.
pub fn segment_debug(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let mask = map_mask(cfg)?;
    let seg = segment_mask(&mask);
    ensure_out(cfg)?;
    let g = *mask.grid();
    let mut text = String::from("# 0-based inclusive [start, end]; row 0 is the northernmost row\n");
    for (axis, name) in [(Axis::X, "row"), (Axis::Y, "column")] {
        for line in 0..g.lines(axis) {
            let segs = seg.line(axis, line);
            let list: Vec<String> = segs.iter().map(|s| format!("[{}, {}]", s.start, s.end)).collect();
            text.push_str(&format!("{name} {line}: {} {}\n", segs.len(), list.join(" ")));
        }
    }
    let path = cfg.out.join("segments.txt");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    let mask_pgm = cfg.out.join("mask.pgm");
    let land = Field2D::from_fn(g, |r, c| if mask.is_habitable(r, c) { 1.0 } else { 0.0 });
    io::write_snapshot_pgm(&Snapshot { time: 0.0, field: land }, &mask_pgm, 1.0)?;

    let mut summary = Summary::new(Scenario::SegmentDebug);
    summary.metric("grid", format!("{}x{}", g.nx, g.ny));
    summary.metric("land_cells", mask.land_count());
    summary.metric("row_segments", seg.total_segments(Axis::X));
    summary.metric("column_segments", seg.total_segments(Axis::Y));
    summary.metric("max_row_segments", seg.row_counts().into_iter().max().unwrap_or(0));
    summary.metric("max_column_segments", seg.column_counts().into_iter().max().unwrap_or(0));
    summary.artifacts.extend([path, mask_pgm]);
    summary.write(&cfg.out)?;
    Ok(summary)
}

/// Low-pass filters the first capacity frame over land.
pub fn smooth_map(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let mut plain = cfg.clone();
    plain.smooth_l = None;
    let (mask, source) = map_inputs(&plain, cfg.t_end.unwrap_or(cfg.t_start + 1.0))?;
    let frame = match source {
        CapacitySource::Static(f) => f,
        CapacitySource::Schedule(s) => s.frames()[0].clone(),
        CapacitySource::Uniform => unreachable!("map inputs always carry capacity"),
    };
    let l = cfg.smooth_l.unwrap_or(DEFAULT_SMOOTH_L);
    let smoothed = smooth_frame(&frame, &mask, &SmoothingFilter::new(l)?)?;
    ensure_out(cfg)?;
    let g = *frame.grid();
    let mut summary = Summary::new(Scenario::SmoothMap);
    for (name, f) in [("capacity", &frame), ("smoothed", &smoothed)] {
        let grid_path = cfg.out.join(format!("{name}.grid"));
        io::write_grid_file(&grid_path, &g, f.values())?;
        let pgm = cfg.out.join(format!("{name}.pgm"));
        let field = Field2D::from_values(g, f.values().to_vec())?;
        io::write_snapshot_pgm(&Snapshot { time: f.time(), field }, &pgm, 1.0)?;
        summary.artifacts.extend([grid_path, pgm]);
    }
    let land: Vec<(f64, f64)> = frame
        .values()
        .iter()
        .zip(smoothed.values())
        .zip(mask.cells())
        .filter(|(_, &l)| l)
        .map(|((&a, &b), _)| (a, b))
        .collect();
    let range = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let before = range(&mut land.iter().map(|p| p.0));
    let after = range(&mut land.iter().map(|p| p.1));
    let mean_change = land.iter().map(|(a, b)| (a - b).abs()).sum::<f64>() / land.len().max(1) as f64;
    summary.metric("L", l);
    summary.metric("range_before", format!("[{:.6}, {:.6}]", before.0, before.1));
    summary.metric("range_after", format!("[{:.6}, {:.6}]", after.0, after.1));
    summary.metric("mean_abs_change", format!("{mean_change:.6e}"));
    summary.write(&cfg.out)?;
    Ok(summary)
}

/// Tabulates the sigmoid weight and the mean land capacity over the schedule.
pub fn interp_preview(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let t_end = cfg.t_end.unwrap_or(cfg.t_start + 10.0);
    let (mask, source) = map_inputs(cfg, t_end)?;
    let schedule = match source {
        CapacitySource::Schedule(s) if s.frames().len() > 1 => s,
        _ => return Err(Error::Config("interp-preview needs at least two capacity frames".into())),
    };
    ensure_out(cfg)?;
    let (lo, hi) = (schedule.start(), schedule.end());
    let land = mask.land_count().max(1) as f64;
    let mut csv = format!("t,S_nu_0.5,S_nu_1,S_nu_{},mean_K\n", cfg.nu);
    for i in 0..PREVIEW_SAMPLES {
        let t = lo + (hi - lo) * i as f64 / (PREVIEW_SAMPLES - 1) as f64;
        let frames = schedule.frames();
        let upper = frames.partition_point(|f| f.time() < t).clamp(1, frames.len() - 1);
        let (tl, th) = (frames[upper - 1].time(), frames[upper].time());
        let s = |nu| sigmoid_weight(t.clamp(tl, th), tl, th, nu);
        let mean_k = capacity_at(&schedule, t)?.values().iter().sum::<f64>() / land;
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            t,
            s(0.5)?,
            s(1.0)?,
            s(cfg.nu)?,
            mean_k
        ));
    }
    let path = cfg.out.join("interp.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let frames = schedule.frames();
    let mid = 0.5 * (frames[0].time() + frames[1].time());
    let mid_frame = capacity_at(&schedule, mid)?;
    let grid_path = cfg.out.join("midpoint.grid");
    io::write_grid_file(&grid_path, mid_frame.grid(), mid_frame.values())?;

    let mut summary = Summary::new(Scenario::InterpPreview);
    summary.metric("frames", frames.len());
    summary.metric("nu", cfg.nu);
    summary.metric("span", format!("[{lo}, {hi}]"));
    summary.metric("midpoint_time", mid);
    summary.artifacts.extend([path, grid_path]);
    summary.write(&cfg.out)?;
    Ok(summary)
}
