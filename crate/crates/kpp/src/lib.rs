//! File formats, a thread-pool sweep driver, scenario runners and the
//! `kpp` command-line tool for the Fisher/KPP splitting solver in
//! [`kpp_core`].

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod init;
pub mod io;
pub mod parallel;
pub mod scenario;
pub mod synthetic;

pub use error::{Error, Result};
pub use kpp_core;
