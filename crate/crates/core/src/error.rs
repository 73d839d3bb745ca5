use crate::grid::Domain;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expected a {expected} field, found a {found} field")]
    WrongDomain { expected: Domain, found: Domain },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("dilation by 2^{m} leaves period multiplier below 1 (P = {period})")]
    DilationOutOfRange { m: i32, period: u64 },

    #[error("scale j = {j} outside the valid range [{lo}, {hi}] for this grid")]
    ScaleOutOfRange { j: i32, lo: i32, hi: i32 },

    #[error("invalid norm specification: {0}")]
    InvalidSpec(String),

    #[error("inadmissible exponent pair: {0}")]
    Inadmissible(String),

    #[error("time {t} is outside the trajectory range or off its time grid")]
    TimeOutOfRange { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("Picard iteration did not converge in window starting at t = {t_start} after {iterations} iterations (last increment {increment:e})")]
    NonConvergence {
        t_start: f64,
        iterations: usize,
        increment: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numeric failures (overflow, non-convergence) as opposed to bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(self, Error::Overflow(_) | Error::NonConvergence { .. })
    }
}
