use alloc::string::String;

/// Errors raised by the solver core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A pivot vanished during tridiagonal elimination.
    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },

    /// Invalid construction or solver parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A value lies outside the domain of an operation (e.g. `K <= 0` on land).
    #[error("domain error: {0}")]
    Domain(String),

    /// Line or segment index outside the grid.
    #[error("index out of range: {0}")]
    Index(String),

    /// A time lies outside the admissible interval.
    #[error("time {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// Non-finite values appeared in the solution.
    #[error("simulation diverged at step {step}")]
    Diverged { step: u64 },

    /// Two grids that must agree do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
