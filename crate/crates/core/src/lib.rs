//! Semi-implicit operator-splitting solver for the Fisher/KPP growth and
//! diffusion equation
//!
//! ```text
//! du/dt = (1 - u/K) u + 1/2 lap(u)
//! ```
//!
//! on 1-D intervals, rectangles and irregular masked maps, with carrying
//! capacity `K` that may vary in space and time.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. Parallel
//! execution plugs in through [`kernels::LineDriver`]; the `kpp` crate
//! provides a thread-pool driver, file formats and the command line tool.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod capacity;
pub mod domain;
mod error;
pub mod kernels;
pub mod linalg;
pub mod reference;

pub use error::{Error, Result};
