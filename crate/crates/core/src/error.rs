use thiserror::Error;

use crate::morrey::NormEstimate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 1 or 2)")]
    Dimension(usize),
    #[error("grid size {0} must be a power of two and at least 16")]
    GridSize(usize),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("shift {0:?} is not a multiple of the grid spacing")]
    NotAligned(Vec<f64>),
    #[error("support radius {support} exceeds the allowed bound {bound}")]
    Support { support: f64, bound: f64 },
    #[error("sample at index {index} is nonzero outside the declared support")]
    SupportViolation { index: usize },
    #[error("band cutoff {k_max} needs 3*2^(k-1) below the Nyquist radius {nyquist}")]
    Aliasing { k_max: usize, nyquist: f64 },
    #[error("scale {0} is below the grid resolution")]
    Unresolved(f64),
    #[error("estimate did not stabilize: {reason}")]
    NotConverged { reason: String, last: Box<NormEstimate> },
    #[error("nothing to compare: {0}")]
    Empty(String),
    #[error("config: {0}")]
    Config(String),
    #[error("malformed binary data: {0}")]
    Format(String),
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
