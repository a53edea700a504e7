//! Built-in initial population shapes.
//!
//! Positions use scaled units with `x` growing eastwards (with the column)
//! and `y` northwards (against the row). Where the origin sits is chosen by
//! the caller through a [`Frame`].

use std::path::Path;
use std::str::FromStr;

use kpp_core::domain::{Field2D, GridSpec};

use crate::error::{Error, Result};
use crate::io;

/// Maps cell indices to positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    /// Fractional column of `x = 0`.
    pub col0: f64,
    /// Fractional row of `y = 0`.
    pub row0: f64,
    pub dx: f64,
}

impl Frame {
    /// Origin at the grid center.
    pub fn centered(grid: &GridSpec) -> Self {
        Self { col0: (grid.nx as f64 - 1.0) / 2.0, row0: (grid.ny as f64 - 1.0) / 2.0, dx: grid.dx }
    }

    /// Origin at the first column of the first row (1-D profiles: `x_i = i dx`).
    pub fn left_edge(grid: &GridSpec) -> Self {
        Self { col0: 0.0, row0: 0.0, dx: grid.dx }
    }

    pub fn x(&self, col: usize) -> f64 {
        (col as f64 - self.col0) * self.dx
    }

    pub fn y(&self, row: usize) -> f64 {
        (self.row0 - row as f64) * self.dx
    }

    /// Fractional `(col, row)` of a position.
    pub fn cell_of(&self, x: f64, y: f64) -> (f64, f64) {
        (self.col0 + x / self.dx, self.row0 - y / self.dx)
    }
}

/// Initial shape parsed from `zero`, `gauss:x,y,sigma`, `disk:x,y,r`,
/// `strip:x,rms`, `step:x`, `seed:row,col[,value]`, or a grid-file path.
#[derive(Debug, Clone, PartialEq)]
pub enum InitShape {
    Zero,
    Gauss { x: f64, y: f64, sigma: f64 },
    Disk { x: f64, y: f64, radius: f64 },
    /// Gaussian in `x` with the given RMS width, constant in `y`.
    Strip { x: f64, rms: f64 },
    /// 1 for positions `<= x`, 0 beyond.
    Step { x: f64 },
    Seed { row: usize, col: usize, value: f64 },
    File(std::path::PathBuf),
}

impl FromStr for InitShape {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let Some((kind, args)) = spec.split_once(':') else {
            return match spec {
                "zero" => Ok(InitShape::Zero),
                _ if Path::new(spec).exists() => Ok(InitShape::File(spec.into())),
                _ => Err(Error::Config(format!("unknown initial condition {spec:?}"))),
            };
        };
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {a:?} in {spec:?}")))
            })
            .collect::<Result<_>>()?;
        let want = |n: &[usize]| {
            if n.contains(&nums.len()) {
                Ok(())
            } else {
                Err(Error::Config(format!("{kind} takes {n:?} arguments, got {}", nums.len())))
            }
        };
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("{kind} {what} must be positive, got {v}")))
            }
        };
        let index = |v: f64| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("seed indices must be whole numbers, got {v}")))
            }
        };
        match kind {
            "gauss" => {
                want(&[3])?;
                Ok(InitShape::Gauss { x: nums[0], y: nums[1], sigma: positive(nums[2], "sigma")? })
            }
            "disk" => {
                want(&[3])?;
                Ok(InitShape::Disk { x: nums[0], y: nums[1], radius: positive(nums[2], "radius")? })
            }
            "strip" => {
                want(&[2])?;
                Ok(InitShape::Strip { x: nums[0], rms: positive(nums[1], "rms")? })
            }
            "step" => {
                want(&[1])?;
                Ok(InitShape::Step { x: nums[0] })
            }
            "seed" => {
                want(&[2, 3])?;
                let value = nums.get(2).copied().unwrap_or(1.0);
                Ok(InitShape::Seed { row: index(nums[0])?, col: index(nums[1])?, value })
            }
            _ => Err(Error::Config(format!("unknown initial condition {spec:?}"))),
        }
    }
}

impl InitShape {
    /// Value of a rotationally symmetric shape at distance `r` from its center.
    pub fn radial_profile(&self) -> Option<(f64, f64, Box<dyn Fn(f64) -> f64 + Send + Sync>)> {
        match *self {
            InitShape::Gauss { x, y, sigma } => {
                Some((x, y, Box::new(move |r: f64| (-(r * r) / (2.0 * sigma * sigma)).exp())))
            }
            InitShape::Disk { x, y, radius } => {
                Some((x, y, Box::new(move |r: f64| if r <= radius { 1.0 } else { 0.0 })))
            }
            _ => None,
        }
    }

    pub fn build(&self, grid: GridSpec, frame: &Frame) -> Result<Field2D> {
        let field = match *self {
            InitShape::Zero => Field2D::zeros(grid),
            InitShape::Gauss { .. } | InitShape::Disk { .. } => {
                let (cx, cy, f) = self.radial_profile().expect("radial shape");
                Field2D::from_fn(grid, |row, col| {
                    let (dx, dy) = (frame.x(col) - cx, frame.y(row) - cy);
                    f((dx * dx + dy * dy).sqrt())
                })
            }
            InitShape::Strip { x, rms } => Field2D::from_fn(grid, |_, col| {
                let d = frame.x(col) - x;
                (-(d * d) / (2.0 * rms * rms)).exp()
            }),
            InitShape::Step { x } => {
                Field2D::from_fn(grid, |_, col| if frame.x(col) <= x { 1.0 } else { 0.0 })
            }
            InitShape::Seed { row, col, value } => {
                if row >= grid.ny || col >= grid.nx {
                    return Err(Error::Config(format!(
                        "seed ({row}, {col}) outside a {}x{} grid",
                        grid.nx, grid.ny
                    )));
                }
                let mut f = Field2D::zeros(grid);
                f.set(row, col, value);
                f
            }
            InitShape::File(ref path) => {
                let f = io::load_field(path)?;
                grid.ensure_matches(f.grid())?;
                f
            }
        };
        Ok(field)
    }
}
