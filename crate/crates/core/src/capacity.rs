//! Carrying-capacity preparation: unit scaling, low-pass smoothing of
//! capacity maps and sigmoid interpolation between time frames.

use alloc::format;
use alloc::vec::Vec;

use crate::domain::{CapacityFrame, GridSpec, MapMask};
use crate::{Error, Result};

/// Growth rate, diffusion coefficient and pixel size in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Growth rate per unit time.
    pub lambda: f64,
    /// Diffusion coefficient, area per unit time.
    pub c: f64,
    /// Physical length of one grid cell.
    pub pixel_size: f64,
}

impl PhysicalParams {
    pub fn new(lambda: f64, c: f64, pixel_size: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("c", c), ("pixel_size", pixel_size)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { lambda, c, pixel_size })
    }
}

/// Dimensionless spacing, step and extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledQuantities {
    pub dx: f64,
    pub h: f64,
    pub extent: f64,
}

/// Lengths scale by `sqrt(lambda / (2 c))`, times by `lambda`.
pub fn scale_to_dimensionless(
    p: &PhysicalParams,
    physical_dt: f64,
    physical_extent: f64,
) -> ScaledQuantities {
    let length = libm::sqrt(p.lambda / (2.0 * p.c));
    ScaledQuantities {
        dx: length * p.pixel_size,
        h: p.lambda * physical_dt,
        extent: length * physical_extent,
    }
}

/// Separable window `(1 - (i/L)^2)(1 - (j/L)^2)` over `|i|, |j| < L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingFilter {
    half_width: usize,
}

impl SmoothingFilter {
    pub fn new(half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::Parameter("smoothing half-width must be >= 1".into()));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn weight(&self, di: isize, dj: isize) -> f64 {
        let l = self.half_width as f64;
        let a = di as f64 / l;
        let b = dj as f64 / l;
        (1.0 - a * a) * (1.0 - b * b)
    }
}

/// Low-pass filters a capacity map over land.
///
/// Each land pixel becomes the weight-normalized mean over land pixels in
/// its window. Rows outside the map are skipped; columns wrap around
/// (periodic longitude). Water stays 0.
pub fn smooth_frame(
    frame: &CapacityFrame,
    mask: &MapMask,
    filter: &SmoothingFilter,
) -> Result<CapacityFrame> {
    let g = *frame.grid();
    g.ensure_matches(mask.grid())?;
    let reach = filter.half_width as isize - 1;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let src = frame.values();
    let mut out = Vec::with_capacity(g.cells());
    for row in 0..g.ny {
        for col in 0..g.nx {
            if !mask.is_habitable(row, col) {
                out.push(0.0);
                continue;
            }
            let mut acc = 0.0;
            let mut total = 0.0;
            for di in -reach..=reach {
                let r = row as isize + di;
                if r < 0 || r >= ny {
                    continue;
                }
                for dj in -reach..=reach {
                    let c = (col as isize + dj).rem_euclid(nx);
                    let (r, c) = (r as usize, c as usize);
                    if !mask.is_habitable(r, c) {
                        continue;
                    }
                    let w = filter.weight(di, dj);
                    acc += w * src[g.index(r, c)];
                    total += w;
                }
            }
            out.push(acc / total);
        }
    }
    CapacityFrame::new(g, frame.time(), out)
}

/// Interpolation weight `S(z(t))` in `[0, 1]` between frames at `t_low` and `t_high`:
///
/// ```text
/// S(z) = 1 / (1 + exp(-z))
/// z    = (2 dT s - dT^2) / (s (dT - s))^nu,   s = t - t_low, dT = t_high - t_low
/// ```
///
/// Exactly 0 at `t_low` and 1 at `t_high`.
pub fn sigmoid_weight(t: f64, t_low: f64, t_high: f64, nu: f64) -> Result<f64> {
    if !(t_low < t_high) {
        return Err(Error::Parameter(format!("need t_low < t_high, got {t_low} and {t_high}")));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Parameter(format!("nu must be positive, got {nu}")));
    }
    if !(t_low..=t_high).contains(&t) {
        return Err(Error::OutOfRange { t, lo: t_low, hi: t_high });
    }
    if t == t_low {
        return Ok(0.0);
    }
    if t == t_high {
        return Ok(1.0);
    }
    let span = t_high - t_low;
    let s = t - t_low;
    let z = (2.0 * span * s - span * span) / libm::pow(s * (span - s), nu);
    Ok(logistic(z))
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

pub const DEFAULT_NU: f64 = 1.0;

/// Time-ordered capacity frames and the interpolation exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidSchedule {
    frames: Vec<CapacityFrame>,
    nu: f64,
}

impl SigmoidSchedule {
    pub fn new(frames: Vec<CapacityFrame>, nu: f64) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Parameter("schedule needs at least one frame".into()))?;
        let grid = *first.grid();
        for w in frames.windows(2) {
            if !(w[0].time() < w[1].time()) {
                return Err(Error::Parameter(format!(
                    "frame times must increase strictly ({} then {})",
                    w[0].time(),
                    w[1].time()
                )));
            }
        }
        for f in &frames {
            grid.ensure_matches(f.grid())?;
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Parameter(format!("nu must be positive, got {nu}")));
        }
        Ok(Self { frames, nu })
    }

    pub fn frames(&self) -> &[CapacityFrame] {
        &self.frames
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> &GridSpec {
        self.frames[0].grid()
    }

    pub fn start(&self) -> f64 {
        self.frames[0].time()
    }

    pub fn end(&self) -> f64 {
        self.frames[self.frames.len() - 1].time()
    }

    /// Applies `f` to every frame.
    pub fn map_frames(
        self,
        mut f: impl FnMut(CapacityFrame) -> Result<CapacityFrame>,
    ) -> Result<Self> {
        let nu = self.nu;
        let frames = self.frames.into_iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(frames, nu)
    }
}

/// Capacity at time `t`: `K_L (1 - S) + K_H S` between the bracketing frames.
pub fn capacity_at(schedule: &SigmoidSchedule, t: f64) -> Result<CapacityFrame> {
    let mut out = Vec::new();
    capacity_into(schedule, t, &mut out)?;
    CapacityFrame::new(*schedule.grid(), t, out)
}

/// Like [`capacity_at`] but writes the values into `out`.
///
/// A single-frame schedule yields that frame at every time.
pub fn capacity_into(schedule: &SigmoidSchedule, t: f64, out: &mut Vec<f64>) -> Result<()> {
    let frames = &schedule.frames;
    out.clear();
    if frames.len() == 1 {
        if !t.is_finite() {
            return Err(Error::Parameter(format!("time must be finite, got {t}")));
        }
        out.extend_from_slice(frames[0].values());
        return Ok(());
    }
    let (lo, hi) = (schedule.start(), schedule.end());
    if !(lo..=hi).contains(&t) {
        return Err(Error::OutOfRange { t, lo, hi });
    }
    if let Some(f) = frames.iter().find(|f| f.time() == t) {
        out.extend_from_slice(f.values());
        return Ok(());
    }
    // t lies strictly inside some (t_L, t_H)
    let upper = frames.partition_point(|f| f.time() < t);
    let (low, high) = (&frames[upper - 1], &frames[upper]);
    let s = sigmoid_weight(t, low.time(), high.time(), schedule.nu)?;
    out.extend(
        low.values()
            .iter()
            .zip(high.values())
            .map(|(&kl, &kh)| kl * (1.0 - s) + kh * s),
    );
    Ok(())
}
