use thiserror::Error;

/// One entry of a fixed-point iterate history.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Iterate {
    pub h_c: f64,
    pub chi: f64,
    pub max_w: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("iterative solver did not converge after {iterations} iterations (last relative residual {:.3e})", residuals.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("fixed-point iteration did not converge after {} iterations", history.len())]
    FixedPoint { history: Vec<Iterate> },

    #[error("degenerate solution: {0}")]
    Degenerate(String),

    #[error("invalid problem: {0}")]
    Problem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
