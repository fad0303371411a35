use thiserror::Error;

/// Errors produced by model construction, solvers and the measurement pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or noise parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Exact enumeration request beyond the tractable size bound.
    #[error("system size {n} exceeds the enumeration bound of {max} spins")]
    TooLarge { n: usize, max: usize },

    /// The located zeros (with multiplicity) do not account for the full
    /// polynomial degree; carries whatever was found for diagnosis.
    #[error(
        "zero count mismatch: found {found} of {expected} zeros (grid aliasing \
         or a degenerate cluster); smallest unresolved gap near theta = {near:.6}"
    )]
    ZeroCountMismatch {
        found: usize,
        expected: usize,
        near: f64,
    },

    /// Iterative root refinement did not reach the update tolerance.
    #[error("root finding did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A curve was too flat or too short to locate a transition knee.
    #[error("no transition estimate: {0}")]
    NoEstimate(String),

    /// No interval of the required kind exists in the data.
    #[error("no interval found: {0}")]
    NoInterval(String),

    /// I/O or (de)serialization failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
