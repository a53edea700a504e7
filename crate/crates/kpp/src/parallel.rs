//! Multi-threaded sweeps.
//!
//! Lines of one sweep are independent, so rows and columns are handed out to
//! a rayon pool. Each line runs the same arithmetic as the sequential driver,
//! so results are bit-identical for every thread count.

use kpp_core::domain::Axis;
use kpp_core::kernels::{LineDriver, SweepKernel};
use kpp_core::linalg::LineMut;
use ndarray::parallel::prelude::*;
use ndarray::{ArrayViewMut1, ArrayViewMut2};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Environment variable capping worker threads; `0` or unset means automatic.
pub const THREADS_ENV: &str = "KPP_THREADS";

/// Reads [`THREADS_ENV`]; `0` stands for the rayon default.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a count, got {s:?}"))),
        _ => Ok(0),
    }
}

struct Column<'a>(ArrayViewMut1<'a, f64>);

impl LineMut for Column<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    #[inline]
    fn set(&mut self, i: usize, value: f64) {
        self.0[i] = value;
    }
}

/// Line driver backed by its own rayon pool.
#[derive(Debug)]
pub struct RayonDriver {
    pool: ThreadPool,
    scratch_len: usize,
}

impl RayonDriver {
    /// `threads = 0` lets rayon choose.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool, scratch_len: 0 })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl LineDriver for RayonDriver {
    fn sweep(&mut self, values: &mut [f64], kernel: &SweepKernel<'_>) -> kpp_core::Result<()> {
        let g = *kernel.grid();
        let len = kernel.scratch_len();
        self.scratch_len = len;
        let scratch = || vec![0.0; len];
        self.pool.install(|| match kernel.axis() {
            Axis::X => values
                .par_chunks_mut(g.nx)
                .enumerate()
                .try_for_each_init(scratch, |s, (row, line)| kernel.run_line(row, line, s)),
            Axis::Y => {
                let mut view = ArrayViewMut2::from_shape((g.ny, g.nx), values)
                    .expect("field length matches its grid");
                view.axis_iter_mut(ndarray::Axis(1))
                    .into_par_iter()
                    .enumerate()
                    .try_for_each_init(scratch, |s, (col, line)| {
                        kernel.run_line(col, &mut Column(line), s)
                    })
            }
        })
    }

    fn scratch_cells_per_line(&self) -> usize {
        self.scratch_len
    }
}
