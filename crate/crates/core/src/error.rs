use thiserror::Error;

/// Errors raised by the analytic and topology routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("harm mean diverges: alpha = {alpha} must exceed beta = {beta}")]
    HarmMeanDiverges { alpha: f64, beta: f64 },
    #[error("tail mean diverges: alpha = {alpha} must exceed beta = {beta}")]
    TailMeanDiverges { alpha: f64, beta: f64 },
    #[error("invalid fragment weights: {0}")]
    InvalidWeights(String),
    #[error("a 3-tier design cannot have more than 2 core switches (got {0})")]
    TooManyCores(usize),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("unknown device id `{0}`")]
    UnknownDevice(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no port count given for role `{0}`")]
    MissingPortCount(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be a finite positive number",
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be a finite nonnegative number",
        })
    }
}

pub(crate) fn check_count(name: &'static str, value: usize) -> Result<usize> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value: 0.0,
            reason: "must be at least 1",
        })
    }
}
