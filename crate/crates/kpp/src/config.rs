//! Run configuration: a flat `key = value` file merged with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kpp_core::capacity::{scale_to_dimensionless, PhysicalParams, DEFAULT_NU};
use kpp_core::kernels::DEFAULT_BETA;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Wave1d,
    Radial2d,
    Desert,
    MapRun,
    SegmentDebug,
    SmoothMap,
    InterpPreview,
    ErrorMetrics,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Wave1d,
        Scenario::Radial2d,
        Scenario::Desert,
        Scenario::MapRun,
        Scenario::SegmentDebug,
        Scenario::SmoothMap,
        Scenario::InterpPreview,
        Scenario::ErrorMetrics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Wave1d => "wave1d",
            Scenario::Radial2d => "radial2d",
            Scenario::Desert => "desert",
            Scenario::MapRun => "map-run",
            Scenario::SegmentDebug => "segment-debug",
            Scenario::SmoothMap => "smooth-map",
            Scenario::InterpPreview => "interp-preview",
            Scenario::ErrorMetrics => "error-metrics",
        }
    }

    /// Whether the scenario advances a field in time.
    pub fn is_simulation(self) -> bool {
        matches!(self, Scenario::Wave1d | Scenario::Radial2d | Scenario::Desert | Scenario::MapRun)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
            Error::Config(format!("unknown scenario {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Desert geometry: `K = f_r` for `x_low < x < x_high`, 1 elsewhere, and a
/// Gaussian strip of initial population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesertSpec {
    pub f_r: f64,
    pub x_low: f64,
    pub x_high: f64,
    pub strip_center: f64,
    pub strip_rms: f64,
    /// Distance from each wall inside which velocity samples are transient.
    pub margin: f64,
}

impl Default for DesertSpec {
    fn default() -> Self {
        Self { f_r: 0.01, x_low: -16.0, x_high: 16.0, strip_center: -30.0, strip_rms: 3.0, margin: 5.0 }
    }
}

/// Optional physical units; when set they override `dx` and `h`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhysicalUnits {
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub pixel_size: Option<f64>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub h: Option<f64>,
    pub dx: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub beta: f64,
    pub nu: f64,
    pub regularize: bool,
    pub alternate_directions: bool,
    pub smooth_l: Option<usize>,
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub snapshot_every: Option<f64>,
    pub out: PathBuf,
    pub mask: Option<PathBuf>,
    /// Frame manifest, or a single capacity grid file.
    pub frames: Option<PathBuf>,
    /// Built-in shape spec or a grid file path.
    pub init: Option<String>,
    /// Input snapshot for `error-metrics`.
    pub snapshot: Option<PathBuf>,
    pub pgm_scale: f64,
    pub desert: DesertSpec,
    pub physical: PhysicalUnits,
    /// Worker threads; `None` defers to `KPP_THREADS`, `Some(0)` is automatic.
    pub threads: Option<usize>,
    /// Compare against the fine-grid reference where one exists.
    pub reference: bool,
    /// Time window for front-velocity estimates.
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
}

impl RunConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            h: None,
            dx: None,
            nx: None,
            ny: None,
            beta: DEFAULT_BETA,
            nu: DEFAULT_NU,
            regularize: true,
            alternate_directions: true,
            smooth_l: None,
            t_start: 0.0,
            t_end: None,
            snapshot_every: None,
            out: PathBuf::from("out"),
            mask: None,
            frames: None,
            init: None,
            snapshot: None,
            pgm_scale: 1.0,
            desert: DesertSpec::default(),
            physical: PhysicalUnits::default(),
            threads: None,
            reference: true,
            window_start: None,
            window_end: None,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. A `scenario` key is required
    /// unless `fallback` supplies one.
    pub fn parse(text: &str, origin: &Path, fallback: Option<Scenario>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = match pairs.iter().find(|(_, k, _)| k == "scenario") {
            Some((line, _, v)) => v.parse().map_err(|e: Error| Error::parse(origin, *line, e.to_string()))?,
            None => fallback.ok_or_else(|| Error::parse(origin, 1, "no `scenario` key"))?,
        };
        let mut cfg = RunConfig::new(scenario);
        for (line, k, v) in &pairs {
            cfg.set(k, v).map_err(|e| Error::parse(origin, *line, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, fallback: Option<Scenario>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, fallback)
    }

    /// Sets one field by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value for {key}: {v:?}")))
        }
        fn flag(key: &str, v: &str) -> Result<bool> {
            match v {
                "true" | "on" | "yes" | "1" => Ok(true),
                "false" | "off" | "no" | "0" => Ok(false),
                _ => Err(Error::Config(format!("bad value for {key}: {v:?} (expected true/false)"))),
            }
        }
        let path = || Some(PathBuf::from(value));
        match key {
            "scenario" => self.scenario = value.parse()?,
            "h" => self.h = Some(num(key, value)?),
            "dx" => self.dx = Some(num(key, value)?),
            "nx" => self.nx = Some(num(key, value)?),
            "ny" => self.ny = Some(num(key, value)?),
            "beta" => self.beta = num(key, value)?,
            "nu" => self.nu = num(key, value)?,
            "fr" | "f_r" => self.desert.f_r = num(key, value)?,
            "smooth_L" | "smooth_l" => self.smooth_l = Some(num(key, value)?),
            "regularize" => self.regularize = flag(key, value)?,
            "alternate_directions" => self.alternate_directions = flag(key, value)?,
            "t_start" => self.t_start = num(key, value)?,
            "t_end" => self.t_end = Some(num(key, value)?),
            "snapshot_every" => self.snapshot_every = Some(num(key, value)?),
            "out" => self.out = PathBuf::from(value),
            "mask" => self.mask = path(),
            "frames" => self.frames = path(),
            "init" => self.init = Some(value.to_string()),
            "snapshot" => self.snapshot = path(),
            "pgm_scale" => self.pgm_scale = num(key, value)?,
            "x_low" => self.desert.x_low = num(key, value)?,
            "x_high" => self.desert.x_high = num(key, value)?,
            "strip_center" => self.desert.strip_center = num(key, value)?,
            "strip_rms" => self.desert.strip_rms = num(key, value)?,
            "margin" => self.desert.margin = num(key, value)?,
            "lambda" => self.physical.lambda = Some(num(key, value)?),
            "c" => self.physical.c = Some(num(key, value)?),
            "pixel_size" => self.physical.pixel_size = Some(num(key, value)?),
            "physical_dt" => self.physical.dt = Some(num(key, value)?),
            "threads" => self.threads = Some(num(key, value)?),
            "reference" => self.reference = flag(key, value)?,
            "window_start" => self.window_start = Some(num(key, value)?),
            "window_end" => self.window_end = Some(num(key, value)?),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Step size and spacing after scenario defaults and physical units.
    pub fn resolved_h_dx(&self, default_h: f64, default_dx: f64) -> Result<(f64, f64)> {
        let mut h = self.h.unwrap_or(default_h);
        let mut dx = self.dx.unwrap_or(default_dx);
        let p = &self.physical;
        if let (Some(lambda), Some(c), Some(pixel)) = (p.lambda, p.c, p.pixel_size) {
            let phys = PhysicalParams::new(lambda, c, pixel)?;
            let scaled = scale_to_dimensionless(&phys, p.dt.unwrap_or(h / lambda), 0.0);
            dx = scaled.dx;
            h = scaled.h;
        } else if p.lambda.is_some() || p.c.is_some() || p.pixel_size.is_some() || p.dt.is_some() {
            return Err(Error::Config("physical units need lambda, c and pixel_size together".into()));
        }
        Ok((h, dx))
    }

    /// Checks values that do not depend on scenario defaults.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(Error::Config(format!("{name} must be positive, got {x}")))
            }
            _ => Ok(()),
        };
        positive("h", self.h)?;
        positive("dx", self.dx)?;
        positive("snapshot_every", self.snapshot_every)?;
        positive("pgm_scale", Some(self.pgm_scale))?;
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be >= 1, got {}", self.beta)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("nu must be positive, got {}", self.nu)));
        }
        if let Some(t_end) = self.t_end {
            if !(t_end > self.t_start) {
                return Err(Error::Config(format!("t_end ({t_end}) must exceed t_start ({})", self.t_start)));
            }
        }
        if self.smooth_l == Some(0) {
            return Err(Error::Config("smooth_L must be >= 1".into()));
        }
        if matches!(self.nx, Some(0)) || matches!(self.ny, Some(0)) {
            return Err(Error::Config("grid sizes must be >= 1".into()));
        }
        let d = &self.desert;
        if !(d.f_r > 0.0 && d.f_r <= 1.0) {
            return Err(Error::Config(format!("fr must lie in (0, 1], got {}", d.f_r)));
        }
        if !(d.x_low < d.x_high) || !(d.strip_rms > 0.0) || !(d.margin >= 0.0) {
            return Err(Error::Config("desert needs x_low < x_high, strip_rms > 0, margin >= 0".into()));
        }
        for p in [&self.mask, &self.frames, &self.snapshot].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}
