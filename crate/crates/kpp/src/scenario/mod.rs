//! Reproducible experiments driven by a [`RunConfig`].

mod desert;
mod maps;
mod radial;
mod wave;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use kpp_core::capacity::{capacity_at, SigmoidSchedule};
use kpp_core::domain::{CapacityFrame, Field2D, Segmentation};
use kpp_core::kernels::{Capacity, LineDriver, SolverParams, Stepper};

use crate::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::io::{self, Snapshot};
use crate::parallel::{threads_from_env, RayonDriver};

pub use desert::{desert, desert_scenario_builder, DesertOutcome, ZoneVelocity};
pub use maps::{interp_preview, map_run, segment_debug, smooth_map, MapOutcome};
pub use radial::{error_metrics_scenario, radial2d, RadialOutcome};
pub use wave::{wave1d, WaveOutcome};

/// What a run reports; everything except `wall` is also written to `summary.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub scenario: Scenario,
    pub t_final: f64,
    pub steps: u64,
    pub min_u: f64,
    pub max_u: f64,
    pub wall: Duration,
    /// Scenario-specific results in display order.
    pub metrics: Vec<(String, String)>,
    pub artifacts: Vec<PathBuf>,
}

impl Summary {
    fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            t_final: 0.0,
            steps: 0,
            min_u: f64::NAN,
            max_u: f64::NAN,
            wall: Duration::ZERO,
            metrics: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, value: impl fmt::Display) {
        self.metrics.push((key.to_string(), value.to_string()));
    }

    fn record(&mut self, stats: &RunStats) {
        self.t_final = stats.t_final;
        self.steps = stats.steps;
        self.min_u = stats.min_u;
        self.max_u = stats.max_u;
    }

    /// Writes `summary.txt` into `out` (deterministic content only).
    fn write(&mut self, out: &Path) -> Result<()> {
        let path = out.join("summary.txt");
        let mut entries = vec![
            ("scenario".to_string(), self.scenario.to_string()),
            ("t_final".to_string(), format!("{:.16e}", self.t_final)),
            ("steps".to_string(), self.steps.to_string()),
            ("min_u".to_string(), format!("{:.16e}", self.min_u)),
            ("max_u".to_string(), format!("{:.16e}", self.max_u)),
        ];
        entries.extend(self.metrics.iter().cloned());
        io::write_key_values(&path, &entries)?;
        self.artifacts.push(path);
        Ok(())
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.scenario)?;
        if self.scenario.is_simulation() {
            writeln!(f, "  final t   {}", self.t_final)?;
            writeln!(f, "  steps     {}", self.steps)?;
            writeln!(f, "  min u     {:.6e}", self.min_u)?;
            writeln!(f, "  max u     {:.6e}", self.max_u)?;
        }
        for (k, v) in &self.metrics {
            writeln!(f, "  {k} = {v}")?;
        }
        writeln!(f, "  wall time {:.3} s", self.wall.as_secs_f64())?;
        write!(f, "  {} artifacts written", self.artifacts.len())
    }
}

/// Runs the configured scenario, writing artifacts below `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let start = Instant::now();
    let mut summary = match cfg.scenario {
        Scenario::Wave1d => wave1d(cfg)?.summary,
        Scenario::Radial2d => radial2d(cfg)?.summary,
        Scenario::Desert => desert(cfg)?.summary,
        Scenario::MapRun => map_run(cfg)?.summary,
        Scenario::SegmentDebug => segment_debug(cfg)?,
        Scenario::SmoothMap => smooth_map(cfg)?,
        Scenario::InterpPreview => interp_preview(cfg)?,
        Scenario::ErrorMetrics => error_metrics_scenario(cfg)?,
    };
    summary.wall = start.elapsed();
    Ok(summary)
}

fn worker_threads(cfg: &RunConfig) -> Result<usize> {
    match cfg.threads {
        Some(n) => Ok(n),
        None => threads_from_env(),
    }
}

fn solver_params(cfg: &RunConfig, h: f64, dx: f64) -> Result<SolverParams> {
    Ok(SolverParams::new(h, dx)?
        .with_beta(cfg.beta)?
        .with_alternate_directions(cfg.alternate_directions)
        .with_regularization(cfg.regularize))
}

fn parallel_stepper(cfg: &RunConfig, params: SolverParams) -> Result<Stepper<RayonDriver>> {
    Ok(Stepper::with_driver(params, RayonDriver::new(worker_threads(cfg)?)?))
}

/// Number of steps of size `h` covering `[t_start, t_end]`.
fn step_count(t_start: f64, t_end: f64, h: f64) -> Result<u64> {
    let n = ((t_end - t_start) / h).round();
    if !(n >= 1.0) {
        return Err(Error::Config(format!("run from {t_start} to {t_end} is shorter than one step ({h})")));
    }
    if ((n * h) - (t_end - t_start)).abs() > 1e-9 * (t_end - t_start).abs().max(1.0) {
        log::warn!("t_end - t_start is not a multiple of h; running {n} steps to t = {}", t_start + n * h);
    }
    Ok(n as u64)
}

/// Capacity over a 2-D run.
#[derive(Debug, Clone)]
pub enum CapacitySource {
    Uniform,
    Static(CapacityFrame),
    Schedule(SigmoidSchedule),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub steps: u64,
    pub t_final: f64,
    pub min_u: f64,
    pub max_u: f64,
}

/// Advances `u` by `steps` steps from `t_start`, calling `observe(step, t, u)`
/// after every step. Extremes cover the initial field and every step.
pub fn integrate<D: LineDriver>(
    stepper: &mut Stepper<D>,
    u: &mut Field2D,
    segments: &Segmentation,
    capacity: &CapacitySource,
    t_start: f64,
    steps: u64,
    mut observe: impl FnMut(u64, f64, &Field2D) -> Result<()>,
) -> Result<RunStats> {
    let h = stepper.params().h();
    let time = |s: u64| t_start + s as f64 * h;
    let frame_at = |schedule: &SigmoidSchedule, t: f64| {
        let t = if schedule.frames().len() > 1 { t.clamp(schedule.start(), schedule.end()) } else { t };
        capacity_at(schedule, t)
    };
    let mut now = match capacity {
        CapacitySource::Schedule(s) => Some(frame_at(s, time(0))?),
        _ => None,
    };
    let (mut min_u, mut max_u) = (u.min(), u.max());
    for s in 0..steps {
        match capacity {
            CapacitySource::Uniform => stepper.step(u, segments, Capacity::Uniform, s)?,
            CapacitySource::Static(k) => stepper.step(u, segments, Capacity::Static(k), s)?,
            CapacitySource::Schedule(schedule) => {
                let next = frame_at(schedule, time(s + 1))?;
                let current = now.as_ref().expect("current frame");
                stepper.step(u, segments, Capacity::Varying { current, next: &next }, s)?;
                now = Some(next);
            }
        }
        min_u = min_u.min(u.min());
        max_u = max_u.max(u.max());
        observe(s + 1, time(s + 1), u)?;
    }
    Ok(RunStats { steps, t_final: time(steps), min_u, max_u })
}

/// Writes numbered snapshots every `every` time units.
struct Snapshots {
    out: PathBuf,
    every: Option<f64>,
    t_start: f64,
    next: u64,
    pgm_scale: Option<f64>,
    written: Vec<PathBuf>,
}

impl Snapshots {
    fn new(cfg: &RunConfig, every: Option<f64>, pgm: bool) -> Self {
        Self {
            out: cfg.out.clone(),
            every,
            t_start: cfg.t_start,
            next: 0,
            pgm_scale: pgm.then_some(cfg.pgm_scale),
            written: Vec::new(),
        }
    }

    /// True when `t` has reached the next snapshot time.
    fn due(&self, t: f64, h: f64) -> bool {
        self.every.is_some_and(|e| t >= self.t_start + self.next as f64 * e - 0.5 * h)
    }

    fn offer(&mut self, t: f64, h: f64, field: &Field2D) -> Result<bool> {
        if !self.due(t, h) {
            return Ok(false);
        }
        let name = format!("snap_{:04}", self.next);
        self.write(&name, t, field)?;
        self.next += 1;
        Ok(true)
    }

    fn write(&mut self, name: &str, t: f64, field: &Field2D) -> Result<()> {
        let snap = Snapshot { time: t, field: field.clone() };
        let csv = self.out.join(format!("{name}.csv"));
        io::write_snapshot_csv(&snap, &csv)?;
        self.written.push(csv);
        if let Some(scale) = self.pgm_scale {
            let pgm = self.out.join(format!("{name}.pgm"));
            io::write_snapshot_pgm(&snap, &pgm, scale)?;
            self.written.push(pgm);
        }
        Ok(())
    }
}

fn ensure_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))
}
