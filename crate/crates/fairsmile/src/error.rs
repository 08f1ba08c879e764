//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Fewer data points than the operation needs.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Sample variance is zero; standardization is undefined.
    #[error("degenerate sample: zero variance")]
    DegenerateSample,

    /// Fourth-moment estimation needs at least four points.
    #[error("insufficient samples for kurtosis: need at least 4, got {got}")]
    InsufficientSamplesForKurtosis { got: usize },

    /// Explicit Euler step would diverge (omega * dt >= 1).
    #[error("unstable discretization: omega * dt = {omega_dt} >= 1")]
    UnstableDiscretization { omega_dt: f64 },

    /// The bandwidth extrapolation produced a negative or non-finite density.
    #[error("extrapolation failed: fitted density at zero is {value}")]
    ExtrapolationFailed { value: f64 },

    /// Option price outside the attainable band; no vol reproduces it.
    #[error("no-arbitrage violation: price {price} outside ({lower}, {upper})")]
    NoArbitrageViolation { price: f64, lower: f64, upper: f64 },

    /// Root solve did not reach the requested tolerance.
    #[error("implied vol solve did not converge: residual {residual}")]
    ImpliedVolDidNotConverge { residual: f64 },

    /// Least-squares design matrix is singular.
    #[error("rank-deficient fit: {context}")]
    RankDeficient { context: String },

    /// Too few return windows in the requested regime.
    #[error("insufficient windows: need at least {needed}, got {got}")]
    InsufficientWindows { needed: usize, got: usize },

    /// Input file had no usable rows.
    #[error("no data: {context}")]
    NoData { context: String },

    /// A CSV row violated the bar invariants or failed to parse.
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    /// Payoff horizon does not match the ensemble.
    #[error("mismatched horizon: {context}")]
    MismatchedHorizon { context: String },

    /// Generic invalid argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Command-line usage problem (maps to exit code 2).
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
