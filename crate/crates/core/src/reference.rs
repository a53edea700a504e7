//! Independent validation tools.
//!
//! The reference solvers integrate the method-of-lines system on a grid
//! `refine` times finer than the coarse one with classical RK4 in time, at an
//! explicit CFL number below 1/4. They share no code with the splitting
//! steppers. The module also carries front tracking and error metrics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{Field2D, GridSpec};
use crate::{Error, Result};

/// Below this magnitude a cell counts as empty in error statistics.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Cells excluded at each edge of the square in radial comparisons.
pub const EDGE_EXCLUSION: usize = 2;

/// Fine-grid reference settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Spatial refinement factor (>= 4).
    pub refine: usize,
    /// Explicit CFL number `h_f / (2 dx_f^2)`; must stay below 1/4.
    pub cfl: f64,
    pub growth: bool,
    pub diffusion: bool,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { refine: 4, cfl: 0.2, growth: true, diffusion: true }
    }
}

impl ReferenceOptions {
    pub fn with_refine(mut self, refine: usize) -> Self {
        self.refine = refine;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.refine < 4 {
            return Err(Error::Parameter(format!(
                "reference refinement must be >= 4, got {}",
                self.refine
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 0.25) {
            return Err(Error::Parameter(format!(
                "explicit stability requires 0 < k < 1/4, got {}",
                self.cfl
            )));
        }
        Ok(())
    }

    fn steps(&self, t_end: f64, dx_fine: f64) -> Result<(usize, f64)> {
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::Parameter(format!("end time must be >= 0, got {t_end}")));
        }
        if t_end == 0.0 {
            return Ok((0, 0.0));
        }
        let h_max = if self.diffusion { 2.0 * self.cfl * dx_fine * dx_fine } else { 1e-3 };
        let n = libm::ceil(t_end / h_max) as usize;
        Ok((n, t_end / n as f64))
    }
}

/// Initial profile as a function of position.
pub trait Profile {
    fn at(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + ?Sized> Profile for F {
    fn at(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Nodal values on `x_i = i dx` with `u = 0` at `-dx` and `n dx`, linearly interpolated.
struct Sampled<'a> {
    values: &'a [f64],
    dx: f64,
}

impl Profile for Sampled<'_> {
    fn at(&self, x: f64) -> f64 {
        interpolate_zero_padded(self.values, self.dx, x, true)
    }
}

fn interpolate_zero_padded(values: &[f64], dx: f64, x: f64, pad_left: bool) -> f64 {
    let n = values.len() as isize;
    let s = x / dx;
    let i = libm::floor(s) as isize;
    let frac = s - i as f64;
    let at = |j: isize| -> f64 {
        if j >= 0 && j < n {
            values[j as usize]
        } else if j < 0 && !pad_left {
            values[(-j).min(n - 1) as usize]
        } else {
            0.0
        }
    };
    at(i) * (1.0 - frac) + at(i + 1) * frac
}

fn rk4<F>(u: &mut [f64], steps: usize, h: f64, rhs: F)
where
    F: Fn(&[f64], &mut [f64]),
{
    let m = u.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut tmp = vec![0.0; m];
    for _ in 0..steps {
        rhs(u, &mut k1);
        for j in 0..m {
            tmp[j] = u[j] + 0.5 * h * k1[j];
        }
        rhs(&tmp, &mut k2);
        for j in 0..m {
            tmp[j] = u[j] + 0.5 * h * k2[j];
        }
        rhs(&tmp, &mut k3);
        for j in 0..m {
            tmp[j] = u[j] + h * k3[j];
        }
        rhs(&tmp, &mut k4);
        for j in 0..m {
            u[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
}

/// 1-D reference from coarse nodal values `u0` (zero beyond both ends).
///
/// Returns the solution at `t_end` sampled at the coarse nodes.
pub fn reference_1d(u0: &[f64], dx: f64, t_end: f64, opts: &ReferenceOptions) -> Result<Vec<f64>> {
    reference_1d_profile(&Sampled { values: u0, dx }, u0.len(), dx, t_end, opts)
}

/// 1-D reference with the initial data given as a function of `x = i dx`.
pub fn reference_1d_profile<P: Profile + ?Sized>(
    u0: &P,
    n: usize,
    dx: f64,
    t_end: f64,
    opts: &ReferenceOptions,
) -> Result<Vec<f64>> {
    opts.validate()?;
    if n == 0 || !(dx > 0.0) {
        return Err(Error::Parameter(format!("bad coarse grid: n = {n}, dx = {dx}")));
    }
    let r = opts.refine;
    let dxf = dx / r as f64;
    // fine nodes strictly between the ghost positions -dx and n dx
    let m = (n + 1) * r - 1;
    let shift = (r - 1) as f64;
    let mut u: Vec<f64> = (0..m).map(|j| u0.at((j as f64 - shift) * dxf)).collect();
    let (steps, h) = opts.steps(t_end, dxf)?;
    let diff = if opts.diffusion { 0.5 / (dxf * dxf) } else { 0.0 };
    let grow = if opts.growth { 1.0 } else { 0.0 };
    rk4(&mut u, steps, h, |v, out| {
        let m = v.len();
        for j in 0..m {
            let l = if j > 0 { v[j - 1] } else { 0.0 };
            let rr = if j + 1 < m { v[j + 1] } else { 0.0 };
            out[j] = diff * (l - 2.0 * v[j] + rr) + grow * v[j] * (1.0 - v[j]);
        }
    });
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("reference solution became non-finite".into()));
    }
    Ok((0..n).map(|i| u[i * r + r - 1]).collect())
}

/// Radially symmetric profile `u(r_i)`, `r_i = i dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    dr: f64,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(dr: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Parameter(format!("radial field needs >= 3 nodes, got {}", values.len())));
        }
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(Error::Parameter(format!("radial spacing must be positive, got {dr}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("radial field has non-finite values".into()));
        }
        Ok(Self { dr, values })
    }

    pub fn from_fn(nr: usize, dr: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dr, (0..nr).map(|i| f(i as f64 * dr)).collect())
    }

    pub fn nr(&self) -> usize {
        self.values.len()
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation in `r`; zero from `nr * dr` outwards.
    pub fn at(&self, r: f64) -> f64 {
        interpolate_zero_padded(&self.values, self.dr, r.abs(), false)
    }
}

impl Profile for RadialField {
    fn at(&self, r: f64) -> f64 {
        RadialField::at(self, r)
    }
}

/// Radial reference from a coarse radial field.
///
/// The result lives on the refined grid (`nr * refine` nodes, spacing
/// `dr / refine`) so that later interpolation in `r` stays accurate.
pub fn reference_radial(u0: &RadialField, t_end: f64, opts: &ReferenceOptions) -> Result<RadialField> {
    reference_radial_profile(u0, u0.nr(), u0.dr(), t_end, opts)
}

/// Radial reference with the initial data given as a function of `r`.
///
/// Uses `(1/r) d/dr (r du/dr)` in conservative form; at the origin the
/// Laplacian is `2 d2u/dr2` with `du/dr = 0`. `u = 0` at `r = nr dr`.
pub fn reference_radial_profile<P: Profile + ?Sized>(
    u0: &P,
    nr: usize,
    dr: f64,
    t_end: f64,
    opts: &ReferenceOptions,
) -> Result<RadialField> {
    opts.validate()?;
    if nr < 3 || !(dr > 0.0) {
        return Err(Error::Parameter(format!("bad radial grid: nr = {nr}, dr = {dr}")));
    }
    let r = opts.refine;
    let drf = dr / r as f64;
    let m = nr * r;
    let mut u: Vec<f64> = (0..m).map(|i| u0.at(i as f64 * drf)).collect();
    let (steps, h) = opts.steps(t_end, drf)?;
    let diff = if opts.diffusion { 0.5 / (drf * drf) } else { 0.0 };
    let grow = if opts.growth { 1.0 } else { 0.0 };
    rk4(&mut u, steps, h, |v, out| {
        let m = v.len();
        out[0] = diff * 4.0 * (v[1] - v[0]) + grow * v[0] * (1.0 - v[0]);
        for i in 1..m {
            let inv = 0.5 / i as f64;
            let outer = if i + 1 < m { v[i + 1] } else { 0.0 };
            let lap = (1.0 + inv) * outer - 2.0 * v[i] + (1.0 - inv) * v[i - 1];
            out[i] = diff * lap + grow * v[i] * (1.0 - v[i]);
        }
    });
    RadialField::new(drf, u)
}

/// Position of the leading (largest-x) crossing of `level / 2`.
///
/// Nodes sit at `x_i = i dx`; the crossing is linearly interpolated between
/// the two bracketing nodes. `None` when no node reaches the level or the
/// last node is still above it.
pub fn front_position(u: &[f64], level: f64, dx: f64) -> Option<f64> {
    let half = 0.5 * level;
    let i = u.iter().rposition(|&v| v >= half)?;
    if i + 1 >= u.len() {
        return None;
    }
    let (a, b) = (u[i] - half, u[i + 1] - half);
    Some((i as f64 + a / (a - b)) * dx)
}

/// Leading crossing of `u = K/2` with a spatially varying `K`.
///
/// Cells with `K <= 0` never count as reached.
pub fn front_position_with_capacity(u: &[f64], capacity: &[f64], dx: f64) -> Option<f64> {
    assert_eq!(u.len(), capacity.len());
    let phi = |i: usize| {
        if capacity[i] > 0.0 {
            u[i] - 0.5 * capacity[i]
        } else {
            -1.0
        }
    };
    let i = (0..u.len()).rev().find(|&i| phi(i) >= 0.0)?;
    if i + 1 >= u.len() {
        return None;
    }
    let (a, b) = (phi(i), phi(i + 1));
    Some((i as f64 + a / (a - b)) * dx)
}

/// Half-height front positions over time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrontTrace {
    /// Capacity whose half defines the tracked level (informational when the
    /// level follows a capacity profile).
    pub k_level: f64,
    samples: Vec<(f64, f64)>,
}

impl FrontTrace {
    pub fn new(k_level: f64) -> Self {
        Self { k_level, samples: Vec::new() }
    }

    pub fn push(&mut self, t: f64, x_half: f64) -> Result<()> {
        if let Some(&(last, _)) = self.samples.last() {
            if !(t > last) {
                return Err(Error::Parameter(format!(
                    "trace times must increase strictly ({last} then {t})"
                )));
            }
        }
        self.samples.push((t, x_half));
        Ok(())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Centered-difference velocity at every sample (None at the ends).
    pub fn velocities(&self) -> Vec<Option<f64>> {
        let s = &self.samples;
        (0..s.len())
            .map(|i| {
                (i > 0 && i + 1 < s.len())
                    .then(|| (s[i + 1].1 - s[i - 1].1) / (s[i + 1].0 - s[i - 1].0))
            })
            .collect()
    }
}

/// `(t, v)` for interior samples with `t` inside `[from, to]`.
pub fn front_velocity(trace: &FrontTrace, from: f64, to: f64) -> Vec<(f64, f64)> {
    trace
        .samples
        .iter()
        .zip(trace.velocities())
        .filter_map(|(&(t, _), v)| v.filter(|_| t >= from && t <= to).map(|v| (t, v)))
        .collect()
}

/// Least-squares slope of `x_half(t)` over samples with `t` in `[from, to]`;
/// `None` with fewer than two samples.
pub fn mean_front_velocity(trace: &FrontTrace, from: f64, to: f64) -> Option<f64> {
    fit_slope(trace.samples.iter().copied().filter(|&(t, _)| t >= from && t <= to))
}

/// Least-squares slope through `(t, x)` points.
pub fn fit_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let (mut n, mut st, mut sx) = (0usize, 0.0, 0.0);
    for (t, x) in points.clone() {
        n += 1;
        st += t;
        sx += x;
    }
    if n < 2 {
        return None;
    }
    let (mt, mx) = (st / n as f64, sx / n as f64);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, x) in points {
        num += (t - mt) * (x - mx);
        den += (t - mt) * (t - mt);
    }
    (den > 0.0).then(|| num / den)
}

/// RMS and maximum absolute difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub rms: f64,
    pub max: f64,
    /// Cells that entered the statistics.
    pub cells: usize,
}

fn accumulate(diffs: impl Iterator<Item = f64>) -> ErrorMetrics {
    let (mut sum, mut max, mut cells) = (0.0, 0.0_f64, 0usize);
    for d in diffs {
        sum += d * d;
        max = max.max(d.abs());
        cells += 1;
    }
    let rms = if cells > 0 { libm::sqrt(sum / cells as f64) } else { 0.0 };
    ErrorMetrics { rms, max, cells }
}

/// Differences between two 1-D profiles over nodes where either exceeds the support threshold.
pub fn profile_metrics(a: &[f64], b: &[f64]) -> ErrorMetrics {
    assert_eq!(a.len(), b.len());
    accumulate(
        a.iter()
            .zip(b)
            .filter(|(x, y)| x.abs() > SUPPORT_THRESHOLD || y.abs() > SUPPORT_THRESHOLD)
            .map(|(x, y)| x - y),
    )
}

/// `u(x, y) - u(r)` with `r` the distance to `center = (col, row)` in
/// fractional cell coordinates. Cells within [`EDGE_EXCLUSION`] of the edge
/// and cells where both values are negligible are set to 0.
pub fn error_field(u2d: &Field2D, radial: &RadialField, center: (f64, f64)) -> Field2D {
    let g: GridSpec = *u2d.grid();
    let e = EDGE_EXCLUSION;
    Field2D::from_fn(g, |row, col| {
        if row < e || col < e || row + e >= g.ny || col + e >= g.nx {
            return 0.0;
        }
        let v = u2d.get(row, col);
        let r = radius(g.dx, center, row, col);
        let w = radial.at(r);
        if v.abs() > SUPPORT_THRESHOLD || w.abs() > SUPPORT_THRESHOLD {
            v - w
        } else {
            0.0
        }
    })
}

fn radius(dx: f64, center: (f64, f64), row: usize, col: usize) -> f64 {
    let dc = col as f64 - center.0;
    let dr = row as f64 - center.1;
    dx * libm::sqrt(dc * dc + dr * dr)
}

/// RMS and max of `|u(x, y) - u(r)|` over compared cells.
pub fn error_metrics(u2d: &Field2D, radial: &RadialField, center: (f64, f64)) -> ErrorMetrics {
    let g = *u2d.grid();
    let e = EDGE_EXCLUSION;
    let mut diffs = Vec::new();
    for row in e..g.ny.saturating_sub(e) {
        for col in e..g.nx.saturating_sub(e) {
            let v = u2d.get(row, col);
            let w = radial.at(radius(g.dx, center, row, col));
            if v.abs() > SUPPORT_THRESHOLD || w.abs() > SUPPORT_THRESHOLD {
                diffs.push(v - w);
            }
        }
    }
    accumulate(diffs.into_iter())
}

/// `||e - rot90(e)||_2 / ||e||_2` for a square field.
pub fn rotation_asymmetry(e: &Field2D) -> Result<f64> {
    let g = *e.grid();
    if g.nx != g.ny {
        return Err(Error::GridMismatch(format!("rotation needs a square grid, got {}x{}", g.nx, g.ny)));
    }
    let n = g.nx;
    let (mut num, mut den) = (0.0, 0.0);
    for row in 0..n {
        for col in 0..n {
            let v = e.get(row, col);
            let d = v - e.get(col, n - 1 - row);
            num += d * d;
            den += v * v;
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(libm::sqrt(num / den))
}
