use thiserror::Error;

/// Errors raised by the evaluators, solvers and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("strong-user noise {noise_strong} exceeds weak-user noise {noise_weak}")]
    NoiseOrderViolation { noise_strong: f64, noise_weak: f64 },

    #[error("noise variance must be positive, got {0}")]
    NonPositiveNoise(f64),

    #[error("rate must be non-negative, got {0}")]
    NegativeRate(f64),

    #[error("parameter index ranges are inconsistent: {0}")]
    IndexRangeMismatch(String),

    #[error("parameters violate the achievability conditions: {0}")]
    InfeasibleParams(String),

    #[error("grid resolution {0} is too coarse (need at least 3 points per axis)")]
    GridTooCoarse(usize),

    #[error("bandwidth ratio alpha = {alpha} is outside the admissible range ({expected})")]
    AlphaOutOfRange { alpha: f64, expected: &'static str },

    #[error("alpha = {alpha} is not realized by K = {k}, M = {m}")]
    AlphaMismatch { alpha: f64, k: usize, m: usize },

    #[error("source is not white (variances differ)")]
    NonWhiteSource,

    #[error("analog transmission needs K = M, got K = {k}, M = {m}")]
    BandwidthMismatch { k: usize, m: usize },

    #[error("chain simulation needs K = M = 2, got K = {k}, M = {m}")]
    ShapeMismatch { k: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to write output: {0}")]
    SinkWriteError(String),

    #[error("failed to parse input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::SinkWriteError(e.to_string())
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidArgument(format!(
            "`{name}` must lie in [0, 1], got {value}"
        )))
    }
}
