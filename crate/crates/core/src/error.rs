use thiserror::Error;

/// Errors raised by the spectral laboratory.
///
/// Variants fall into two families: precondition failures (a theorem
/// hypothesis, an exponent window, a contamination guard) and internal
/// failures (I/O, malformed files, non-finite arithmetic). The CLI maps the
/// first family to exit code 2 via [`Error::is_precondition`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("representation mismatch: operation needs {expected} data, got {found}")]
    Representation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("boundary contamination {fraction:.3e} exceeds limit {limit:.1e}")]
    Contamination { fraction: f64, limit: f64 },

    #[error("spectral energy fraction {leak:.3e} near Nyquist exceeds {limit:.1e}; data is not band-limited on this grid")]
    Aliasing { leak: f64, limit: f64 },

    #[error("invalid exponent: {0}")]
    Exponent(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("field mean {0:.3e} is nonzero; negative-order homogeneous multipliers need zero-mean input")]
    NonzeroMean(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("zero denominator in {0}")]
    ZeroDenominator(String),

    #[error("time grid: {0}")]
    TimeGrid(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("band {band} outside partition [{j_min}, {j_max}]")]
    Band { band: i32, j_min: i32, j_max: i32 },

    #[error("axis {axis} out of range for dimension {dim}")]
    Axis { axis: usize, dim: usize },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error reports a violated precondition rather than an
    /// internal failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::Format(_) | Error::NonFinite(_) | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
