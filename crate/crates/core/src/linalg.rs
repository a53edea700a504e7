//! Tridiagonal solves and the discrete second difference.
//!
//! Every linear system produced by the steppers has the shape
//!
//! ```text
//! | d0  c           |
//! | a   d1  c       |
//! |     a   d2  c   |
//! |         ...     |
//! ```
//!
//! with constant off-diagonals `a`, `c` and a strictly dominant diagonal, so
//! plain Thomas elimination (no pivoting) is used throughout.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Relative size below which a pivot is treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Tridiagonal system with constant sub- and super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagSystem {
    pub sub: f64,
    pub sup: f64,
    pub diag: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagSystem {
    pub fn new(sub: f64, sup: f64, diag: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Parameter("tridiagonal system needs n >= 1".into()));
        }
        if diag.len() != rhs.len() {
            return Err(Error::Parameter(format!(
                "diag has length {} but rhs has length {}",
                diag.len(),
                rhs.len()
            )));
        }
        Ok(Self { sub, sup, diag, rhs })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `|diag[i]| > |sub| + |sup|` for every row.
    pub fn is_strictly_dominant(&self) -> bool {
        let off = self.sub.abs() + self.sup.abs();
        self.diag.iter().all(|d| d.abs() > off)
    }

    /// Matrix-vector product with the system matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n, "vector length must match the system");
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup * x[i + 1];
                }
                acc
            })
            .collect()
    }
}

/// Solves the system and returns the solution vector.
pub fn solve_tridiagonal(sys: &TridiagSystem) -> Result<Vec<f64>> {
    let mut diag = sys.diag.clone();
    let mut x = sys.rhs.clone();
    solve_in_place(sys.sub, sys.sup, &mut diag, &mut x)?;
    Ok(x)
}

/// Thomas elimination in place.
///
/// On return `rhs` holds the solution and `diag` has been overwritten with the
/// modified super-diagonal coefficients.
pub fn solve_in_place(sub: f64, sup: f64, diag: &mut [f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    assert_eq!(n, rhs.len(), "diag and rhs lengths differ");
    if n == 0 {
        return Ok(());
    }
    let scale = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let tol = PIVOT_TOLERANCE * scale;

    let mut c_prev = 0.0;
    let mut d_prev = 0.0;
    for i in 0..n {
        let pivot = diag[i] - sub * c_prev;
        if !(pivot.abs() >= tol) || pivot == 0.0 {
            return Err(Error::SingularSystem { row: i, pivot });
        }
        c_prev = sup / pivot;
        d_prev = (rhs[i] - sub * d_prev) / pivot;
        diag[i] = c_prev;
        rhs[i] = d_prev;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= diag[i] * rhs[i + 1];
    }
    Ok(())
}

/// `out[i] = u[i-1] - 2 u[i] + u[i+1]`, with zero outside both ends.
pub fn apply_second_difference(u: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; u.len()];
    second_difference_into(u, &mut out);
    out
}

pub fn second_difference_into(u: &[f64], out: &mut [f64]) {
    let n = u.len();
    assert_eq!(out.len(), n);
    for i in 0..n {
        let left = if i > 0 { u[i - 1] } else { 0.0 };
        let right = if i + 1 < n { u[i + 1] } else { 0.0 };
        out[i] = left - 2.0 * u[i] + right;
    }
}

/// Mutable access to a 1-D run of grid values, possibly strided.
pub trait LineMut {
    fn len(&self) -> usize;
    fn get(&self, i: usize) -> f64;
    fn set(&mut self, i: usize, value: f64);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LineMut for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i]
    }

    #[inline]
    fn set(&mut self, i: usize, value: f64) {
        self[i] = value;
    }
}

impl LineMut for Vec<f64> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i]
    }

    #[inline]
    fn set(&mut self, i: usize, value: f64) {
        self[i] = value;
    }
}

/// Solves a three-point stencil system over `line[start..start + n]` in place.
///
/// The off-diagonals are both `off`. For each row `i` the caller's `row`
/// closure receives `i` and the *original* values `[u[i-1], u[i], u[i+1]]`
/// (zero beyond the run) and returns `(diag_i, rhs_i)`. Only `scratch[..n]`
/// is used as auxiliary storage: the run itself holds the intermediate
/// right-hand side during elimination.
pub fn solve_stencil_run<L, F>(
    line: &mut L,
    start: usize,
    n: usize,
    off: f64,
    scratch: &mut [f64],
    mut row: F,
) -> Result<()>
where
    L: LineMut + ?Sized,
    F: FnMut(usize, [f64; 3]) -> (f64, f64),
{
    if n == 0 {
        return Ok(());
    }
    assert!(scratch.len() >= n, "scratch too small for run of {n}");
    assert!(start + n <= line.len(), "run exceeds line");

    let mut scale = 0.0_f64;
    let mut prev = 0.0;
    let mut cur = line.get(start);
    let mut c_prev = 0.0;
    let mut d_prev = 0.0;
    for i in 0..n {
        let next = if i + 1 < n { line.get(start + i + 1) } else { 0.0 };
        let (diag, rhs) = row(i, [prev, cur, next]);
        scale = scale.max(diag.abs());
        let pivot = diag - off * c_prev;
        if !(pivot.abs() >= PIVOT_TOLERANCE * scale) || pivot == 0.0 {
            return Err(Error::SingularSystem { row: i, pivot });
        }
        c_prev = off / pivot;
        d_prev = (rhs - off * d_prev) / pivot;
        scratch[i] = c_prev;
        line.set(start + i, d_prev);
        prev = cur;
        cur = next;
    }
    let mut x_next = line.get(start + n - 1);
    for i in (0..n - 1).rev() {
        let x = line.get(start + i) - scratch[i] * x_next;
        line.set(start + i, x);
        x_next = x;
    }
    Ok(())
}
