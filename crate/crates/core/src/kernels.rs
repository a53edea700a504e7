//! Time steppers.
//!
//! One 2-D step from `t` to `t + h` is three directional sweeps:
//!
//! ```text
//! (1 - k/4 A_x) u*  = (1 + k/4 A_x) u(t)
//! u_E               = u* + k A_y u* + h (1 - u*/K(t)) u*
//! (1 - k/2 A_y - h/2 (1 - u_E/K(t+h))) u** = (1 + k/2 A_y + h/2 (1 - u*/K(t))) u*
//! (1 - k/4 A_x) u(t+h) = (1 + k/4 A_x) u**
//! ```
//!
//! with `k = h / (2 dx^2)`. Each sweep is a set of independent tridiagonal
//! solves, one per habitable segment of each row or column, with `u = 0`
//! just beyond both segment ends. With a uniform capacity the ratios `u/K`
//! reduce to `u`; otherwise they are optionally passed through the
//! regularizer `(1/h) g(h u/K)`, `g(x) = tanh(x^beta)^(1/beta)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{Axis, CapacityFrame, Field2D, GridSpec, Segmentation, StridedLine};
use crate::linalg::{solve_stencil_run, LineMut};
use crate::{Error, Result};

pub const DEFAULT_BETA: f64 = 4.0;

/// Step size, spacing and scheme toggles. `k` is always derived from `h` and `dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    h: f64,
    dx: f64,
    k: f64,
    beta: f64,
    alternate_directions: bool,
    regularize: bool,
}

impl SolverParams {
    /// Defaults: `beta = 4`, alternating directions and regularization on.
    pub fn new(h: f64, dx: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Parameter(format!("step size must be positive, got {h}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Parameter(format!("spacing must be positive, got {dx}")));
        }
        let k = cfl(h, dx);
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Parameter(format!("CFL parameter {k} out of range")));
        }
        Ok(Self {
            h,
            dx,
            k,
            beta: DEFAULT_BETA,
            alternate_directions: true,
            regularize: true,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::Parameter(format!("regularizer exponent must be >= 1, got {beta}")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn with_alternate_directions(mut self, on: bool) -> Self {
        self.alternate_directions = on;
        self
    }

    pub fn with_regularization(mut self, on: bool) -> Self {
        self.regularize = on;
        self
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// CFL parameter `h / (2 dx^2)`.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alternate_directions(&self) -> bool {
        self.alternate_directions
    }

    pub fn regularize(&self) -> bool {
        self.regularize
    }
}

/// `h / (2 dx^2)`.
pub fn cfl(h: f64, dx: f64) -> f64 {
    h / (2.0 * dx * dx)
}

/// `g(x) = tanh(x^beta)^(1/beta)`, extended as an odd function to `x < 0`.
pub fn regularizer(x: f64, beta: f64) -> f64 {
    let a = x.abs();
    let g = libm::pow(libm::tanh(libm::pow(a, beta)), 1.0 / beta);
    if x < 0.0 {
        -g
    } else {
        g
    }
}

/// Regularized ratio `(1/h) g(h u/K)`.
pub fn regularized_ratio(u: f64, capacity: f64, h: f64, beta: f64) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::Domain(format!("capacity must be positive, got {capacity}")));
    }
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("step size must be positive, got {h}")));
    }
    Ok(regularizer(h * u / capacity, beta) / h)
}

#[inline]
fn capacity_ratio(u: f64, capacity: f64, params: &SolverParams) -> f64 {
    if params.regularize {
        regularizer(params.h * u / capacity, params.beta) / params.h
    } else {
        u / capacity
    }
}

/// Euler estimate `u + k A u + h (1 - u/K) u` on a padded vector.
///
/// `u` carries one ghost cell at each end; the ghosts of the result are 0.
/// With `capacity = None` the capacity is 1 and no regularization applies;
/// otherwise `capacity` is padded like `u` and the ratio is regularized when
/// `params.regularize()` is set.
pub fn euler_estimate_1d(u: &[f64], params: &SolverParams, capacity: Option<&[f64]>) -> Vec<f64> {
    let m = u.len();
    if let Some(c) = capacity {
        assert_eq!(c.len(), m, "capacity and field lengths differ");
    }
    let mut out = vec![0.0; m];
    for i in 1..m.saturating_sub(1) {
        let lap = u[i - 1] - 2.0 * u[i] + u[i + 1];
        let ratio = match capacity {
            Some(c) => capacity_ratio(u[i], c[i], params),
            None => u[i],
        };
        out[i] = u[i] + params.k * lap + params.h * (1.0 - ratio) * u[i];
    }
    out
}

/// One semi-implicit step of the 1-D equation with unit capacity:
///
/// ```text
/// (1 - k/2 A - h/2 (1 - u_E)) u(t+h) = u + k/2 A u + h/2 (1 - u) u
/// ```
///
/// `u` is padded with a zero ghost cell at each end.
pub fn step_1d(u: &[f64], params: &SolverParams) -> Result<Vec<f64>> {
    if u.len() < 3 {
        return Err(Error::Parameter(format!(
            "padded vector needs at least 3 entries, got {}",
            u.len()
        )));
    }
    let n = u.len() - 2;
    let (h, k) = (params.h, params.k);
    let mut out = u.to_vec();
    let mut scratch = vec![0.0; n];
    solve_stencil_run(&mut out, 1, n, -0.5 * k, &mut scratch, |_, [l, c, r]| {
        let lap = l - 2.0 * c + r;
        let u_e = c + k * lap + h * (1.0 - c) * c;
        let diag = 1.0 + k - 0.5 * h * (1.0 - u_e);
        let rhs = c + 0.5 * k * lap + 0.5 * h * (1.0 - c) * c;
        (diag, rhs)
    })?;
    out[0] = 0.0;
    out[n + 1] = 0.0;
    Ok(out)
}

/// Carrying capacity seen by one 2-D step.
#[derive(Debug, Clone, Copy)]
pub enum Capacity<'a> {
    /// `K = 1` everywhere.
    Uniform,
    /// `K(x)`, constant in time.
    Static(&'a CapacityFrame),
    /// `K(x, t)` at the start and end of the step.
    Varying {
        current: &'a CapacityFrame,
        next: &'a CapacityFrame,
    },
}

impl<'a> Capacity<'a> {
    fn frames(&self) -> Option<(&'a CapacityFrame, &'a CapacityFrame)> {
        match *self {
            Capacity::Uniform => None,
            Capacity::Static(k) => Some((k, k)),
            Capacity::Varying { current, next } => Some((current, next)),
        }
    }
}

/// Which sub-step a sweep performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStage {
    /// `(1 - k/4 A) v = (1 + k/4 A) u`.
    HalfDiffusion,
    /// Full step of diffusion plus the semi-implicit logistic term.
    Reaction,
}

/// Everything a single sweep needs to update one grid line.
#[derive(Debug, Clone, Copy)]
pub struct SweepKernel<'a> {
    grid: GridSpec,
    axis: Axis,
    stage: SweepStage,
    segments: &'a Segmentation,
    capacity: Capacity<'a>,
    params: &'a SolverParams,
    step: u64,
}

impl<'a> SweepKernel<'a> {
    pub fn new(
        grid: GridSpec,
        axis: Axis,
        stage: SweepStage,
        segments: &'a Segmentation,
        capacity: Capacity<'a>,
        params: &'a SolverParams,
        step: u64,
    ) -> Self {
        Self { grid, axis, stage, segments, capacity, params, step }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn stage(&self) -> SweepStage {
        self.stage
    }

    /// Scratch cells a driver must provide per line.
    pub fn scratch_len(&self) -> usize {
        self.grid.max_line() + 2
    }

    /// Updates every segment of line `line_index`; `line` holds that line's
    /// values (row or column, depending on the axis) and is updated in place.
    pub fn run_line<L: LineMut + ?Sized>(
        &self,
        line_index: usize,
        line: &mut L,
        scratch: &mut [f64],
    ) -> Result<()> {
        debug_assert_eq!(line.len(), self.grid.line_len(self.axis));
        let p = self.params;
        let (h, k) = (p.h, p.k);
        for seg in self.segments.line(self.axis, line_index) {
            let n = seg.len();
            match self.stage {
                SweepStage::HalfDiffusion => {
                    let c = 0.25 * k;
                    solve_stencil_run(line, seg.start, n, -c, scratch, |_, [l, u, r]| {
                        (1.0 + 2.0 * c, u + c * (l - 2.0 * u + r))
                    })?;
                }
                SweepStage::Reaction => match self.capacity.frames() {
                    None => {
                        solve_stencil_run(line, seg.start, n, -0.5 * k, scratch, |_, [l, u, r]| {
                            let lap = l - 2.0 * u + r;
                            let u_e = u + k * lap + h * (1.0 - u) * u;
                            let diag = 1.0 + k - 0.5 * h * (1.0 - u_e);
                            debug_assert!(u_e < 0.0 || h >= 2.0 || diag > k);
                            (diag, u + 0.5 * k * lap + 0.5 * h * (1.0 - u) * u)
                        })?;
                    }
                    Some((now, next)) => {
                        let (k_now, k_next) = (now.values(), next.values());
                        let g = self.grid;
                        let (axis, start) = (self.axis, seg.start);
                        for pos in seg.start..=seg.end {
                            let idx = g.line_index(axis, line_index, pos);
                            if !(k_now[idx] > 0.0 && k_next[idx] > 0.0) {
                                return Err(Error::Domain(format!(
                                    "non-positive capacity on habitable cell {idx}"
                                )));
                            }
                        }
                        solve_stencil_run(line, start, n, -0.5 * k, scratch, |i, [l, u, r]| {
                            let idx = g.line_index(axis, line_index, start + i);
                            let lap = l - 2.0 * u + r;
                            let growth = 1.0 - capacity_ratio(u, k_now[idx], p);
                            let u_e = u + k * lap + h * growth * u;
                            let diag = 1.0 + k - 0.5 * h * (1.0 - capacity_ratio(u_e, k_next[idx], p));
                            (diag, u + 0.5 * k * lap + 0.5 * h * growth * u)
                        })?;
                    }
                },
            }
            if cfg!(debug_assertions) && (seg.start..=seg.end).any(|q| !line.get(q).is_finite()) {
                return Err(Error::Diverged { step: self.step });
            }
        }
        Ok(())
    }
}

/// Runs a sweep kernel over every line of a field.
///
/// Implementations may process lines concurrently: a line's update reads and
/// writes only that line's cells.
pub trait LineDriver {
    fn sweep(&mut self, values: &mut [f64], kernel: &SweepKernel<'_>) -> Result<()>;

    /// Auxiliary cells held for each line being processed.
    fn scratch_cells_per_line(&self) -> usize;
}

/// Scratch storage for one line update, sized `max(nx, ny) + 2`.
#[derive(Debug, Clone, Default)]
pub struct StepWorkspace {
    scratch: Vec<f64>,
}

impl StepWorkspace {
    pub fn new(grid: &GridSpec) -> Self {
        Self { scratch: vec![0.0; grid.max_line() + 2] }
    }

    pub fn cells(&self) -> usize {
        self.scratch.len()
    }

    pub fn scratch_mut(&mut self) -> &mut [f64] {
        &mut self.scratch
    }

    fn fit(&mut self, len: usize) {
        if self.scratch.len() != len {
            self.scratch = vec![0.0; len];
        }
    }
}

/// Processes lines one after another with a single workspace.
#[derive(Debug, Clone, Default)]
pub struct SequentialDriver {
    workspace: StepWorkspace,
}

impl SequentialDriver {
    pub fn new(grid: &GridSpec) -> Self {
        Self { workspace: StepWorkspace::new(grid) }
    }

    pub fn workspace(&self) -> &StepWorkspace {
        &self.workspace
    }
}

impl LineDriver for SequentialDriver {
    fn sweep(&mut self, values: &mut [f64], kernel: &SweepKernel<'_>) -> Result<()> {
        let g = *kernel.grid();
        self.workspace.fit(kernel.scratch_len());
        let scratch = self.workspace.scratch_mut();
        match kernel.axis() {
            Axis::X => {
                for (row, line) in values.chunks_mut(g.nx).enumerate() {
                    kernel.run_line(row, line, scratch)?;
                }
            }
            Axis::Y => {
                for col in 0..g.nx {
                    let mut line = StridedLine::new(values, col, g.nx, g.ny);
                    kernel.run_line(col, &mut line, scratch)?;
                }
            }
        }
        Ok(())
    }

    fn scratch_cells_per_line(&self) -> usize {
        self.workspace.cells()
    }
}

/// Outer (half-step) and inner (full-step) sweep axes for a given step.
pub fn sweep_order(params: &SolverParams, step_index: u64) -> (Axis, Axis) {
    if params.alternate_directions && step_index % 2 == 1 {
        (Axis::Y, Axis::X)
    } else {
        (Axis::X, Axis::Y)
    }
}

/// Advances 2-D fields by whole steps.
#[derive(Debug, Clone)]
pub struct Stepper<D = SequentialDriver> {
    params: SolverParams,
    driver: D,
}

impl Stepper<SequentialDriver> {
    pub fn new(params: SolverParams, grid: &GridSpec) -> Self {
        Self { params, driver: SequentialDriver::new(grid) }
    }
}

impl<D: LineDriver> Stepper<D> {
    pub fn with_driver(params: SolverParams, driver: D) -> Self {
        Self { params, driver }
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn driver(&self) -> &D {
        &self.driver
    }

    /// Advances `u` from `t` to `t + h` in place.
    pub fn step(
        &mut self,
        u: &mut Field2D,
        segments: &Segmentation,
        capacity: Capacity<'_>,
        step_index: u64,
    ) -> Result<()> {
        let grid = *u.grid();
        if segments.columns() != grid.nx || segments.rows() != grid.ny {
            return Err(Error::GridMismatch(format!(
                "segmentation is {}x{}, field is {}x{}",
                segments.columns(),
                segments.rows(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some((now, next)) = capacity.frames() {
            grid.ensure_matches(now.grid())?;
            grid.ensure_matches(next.grid())?;
        }
        let (outer, inner) = sweep_order(&self.params, step_index);
        let params = self.params;
        let sweeps = [
            (outer, SweepStage::HalfDiffusion),
            (inner, SweepStage::Reaction),
            (outer, SweepStage::HalfDiffusion),
        ];
        for (axis, stage) in sweeps {
            let kernel =
                SweepKernel::new(grid, axis, stage, segments, capacity, &params, step_index);
            self.driver.sweep(u.values_mut(), &kernel)?;
        }
        if !u.is_finite() {
            return Err(Error::Diverged { step: step_index });
        }
        Ok(())
    }
}

/// Single step with capacity `K(t)` and `K(t + h)`; returns the new field.
pub fn godunov_step_2d(
    u: &Field2D,
    segments: &Segmentation,
    capacity_now: &CapacityFrame,
    capacity_next: &CapacityFrame,
    params: &SolverParams,
    step_index: u64,
) -> Result<Field2D> {
    let mut out = u.clone();
    let mut stepper = Stepper::new(*params, u.grid());
    stepper.step(
        &mut out,
        segments,
        Capacity::Varying { current: capacity_now, next: capacity_next },
        step_index,
    )?;
    Ok(out)
}
