use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidSpace(String),
    #[error("invalid state point: {0}")]
    InvalidPoint(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("region index {index} out of range for a space of {len} states")]
    RegionIndex { index: usize, len: usize },
    #[error("empty region")]
    EmptyRegion,
    #[error("invalid reward field: {0}")]
    InvalidReward(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("distribution length {got} does not match support size {expected}")]
    SupportMismatch { expected: usize, got: usize },
    #[error("degenerate distribution: total mass {0:e} after tilting")]
    DegenerateMass(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("not enough valid points for a decay fit: {0} (need at least 3)")]
    InsufficientFitPoints(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
}
