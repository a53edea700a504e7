//! Dense, whole-grid reimplementations used as independent oracles.
//!
//! Nothing here shares code with the library: systems are assembled as full
//! matrices and solved by Gaussian elimination with partial pivoting.
#![allow(dead_code)]

pub type Matrix = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// `a + s b`.
pub fn add_scaled(a: &Matrix, s: f64, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + s * y).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Matrix, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, p);
        b.swap(col, p);
        let pivot = a[col][col];
        assert!(pivot.abs() > 1e-300, "singular dense system");
        for r in col + 1..n {
            let f = a[r][col] / pivot;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Dense tridiagonal matrix with constant off-diagonals.
pub fn tridiagonal(sub: f64, sup: f64, diag: &[f64]) -> Matrix {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i > 0 {
            a[i][i - 1] = sub;
        }
        if i + 1 < n {
            a[i][i + 1] = sup;
        }
    }
    a
}

/// Second-difference matrix on `n` points with zero outside.
pub fn laplacian_1d(n: usize) -> Matrix {
    tridiagonal(1.0, 1.0, &vec![-2.0; n])
}

/// `tanh(x^beta)^(1/beta)`, odd in `x`.
pub fn g(x: f64, beta: f64) -> f64 {
    x.signum() * x.abs().powf(beta).tanh().powf(1.0 / beta)
}

/// Euler estimate on the unpadded interior, `K = 1`, no regularization.
pub fn euler_1d(u: &[f64], h: f64, dx: f64) -> Vec<f64> {
    let k = h / (2.0 * dx * dx);
    let au = mat_vec(&laplacian_1d(u.len()), u);
    u.iter().zip(&au).map(|(&v, &a)| v + k * a + h * (1.0 - v) * v).collect()
}

/// One semi-implicit 1-D step on the unpadded interior, `K = 1`.
pub fn step_1d(u: &[f64], h: f64, dx: f64) -> Vec<f64> {
    let n = u.len();
    let k = h / (2.0 * dx * dx);
    let a = laplacian_1d(n);
    let ue = euler_1d(u, h, dx);
    let mut lhs = add_scaled(&identity(n), -0.5 * k, &a);
    for i in 0..n {
        lhs[i][i] -= 0.5 * h * (1.0 - ue[i]);
    }
    let au = mat_vec(&a, u);
    let rhs: Vec<f64> = (0..n).map(|i| u[i] + 0.5 * k * au[i] + 0.5 * h * (1.0 - u[i]) * u[i]).collect();
    dense_solve(lhs, rhs)
}

/// Whole-grid problem for the dense 2-D oracle. Cell `(r, c)` is `r * nx + c`.
#[derive(Debug, Clone)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub land: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

impl Grid2 {
    fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Directional second difference over land with `u = 0` on water and off-grid;
    /// rows of water cells are zero.
    pub fn laplacian(&self, dir: Dir) -> Matrix {
        let n = self.cells();
        let mut a = vec![vec![0.0; n]; n];
        for r in 0..self.ny {
            for c in 0..self.nx {
                let i = r * self.nx + c;
                if !self.land[i] {
                    continue;
                }
                a[i][i] = -2.0;
                let neighbours: [(isize, isize); 2] = match dir {
                    Dir::X => [(0, -1), (0, 1)],
                    Dir::Y => [(-1, 0), (1, 0)],
                };
                for (dr, dc) in neighbours {
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    if rr < 0 || cc < 0 || rr >= self.ny as isize || cc >= self.nx as isize {
                        continue;
                    }
                    let j = rr as usize * self.nx + cc as usize;
                    if self.land[j] {
                        a[i][j] = 1.0;
                    }
                }
            }
        }
        a
    }

    /// `(I - s A) v = (I + s A) u` on land; water keeps its value.
    fn half_diffusion(&self, u: &[f64], dir: Dir, s: f64) -> Vec<f64> {
        let a = self.laplacian(dir);
        let rhs = mat_vec(&add_scaled(&identity(self.cells()), s, &a), u);
        let rhs: Vec<f64> = rhs.iter().zip(u).zip(&self.land).map(|((&r, &v), &l)| if l { r } else { v }).collect();
        dense_solve(add_scaled(&identity(self.cells()), -s, &a), rhs)
    }
}

/// Carrying capacity for [`step_2d`]: `None` means `K = 1` with plain ratios.
pub struct Capacities<'a> {
    pub now: &'a [f64],
    pub next: &'a [f64],
    pub regularize: bool,
    pub beta: f64,
}

/// One full split step: half outer diffusion, full inner diffusion-reaction,
/// half outer diffusion. The outer direction is `y` on odd steps when alternating.
pub fn step_2d(
    grid: &Grid2,
    u: &[f64],
    h: f64,
    capacity: Option<Capacities<'_>>,
    alternate: bool,
    step_index: u64,
) -> Vec<f64> {
    let n = grid.cells();
    let k = h / (2.0 * grid.dx * grid.dx);
    let (outer, inner) = if alternate && step_index % 2 == 1 { (Dir::Y, Dir::X) } else { (Dir::X, Dir::Y) };
    let ratio = |v: f64, cap: Option<f64>| match (&capacity, cap) {
        (Some(c), Some(kk)) if c.regularize => g(h * v / kk, c.beta) / h,
        (Some(_), Some(kk)) => v / kk,
        _ => v,
    };
    let k_now = |i: usize| capacity.as_ref().map(|c| c.now[i]);
    let k_next = |i: usize| capacity.as_ref().map(|c| c.next[i]);

    let us = grid.half_diffusion(u, outer, 0.25 * k);
    let a = grid.laplacian(inner);
    let aus = mat_vec(&a, &us);
    let growth: Vec<f64> = (0..n).map(|i| 1.0 - ratio(us[i], k_now(i))).collect();
    let ue: Vec<f64> = (0..n).map(|i| us[i] + k * aus[i] + h * growth[i] * us[i]).collect();
    let mut lhs = add_scaled(&identity(n), -0.5 * k, &a);
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        if grid.land[i] {
            lhs[i][i] -= 0.5 * h * (1.0 - ratio(ue[i], k_next(i)));
            rhs[i] = us[i] + 0.5 * k * aus[i] + 0.5 * h * growth[i] * us[i];
        } else {
            rhs[i] = us[i];
        }
    }
    let uss = dense_solve(lhs, rhs);
    grid.half_diffusion(&uss, outer, 0.25 * k)
}
