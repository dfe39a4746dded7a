use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grade {0} does not exist in a 3-dimensional algebra (expected 0..=3)")]
    InvalidGrade(usize),

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("target is not a unit element of S³ (norm² = {0})")]
    NonUnitTarget(f64),

    #[error("factor count must be at least 1")]
    ZeroFactorCount,

    #[error("point ({x}, {y}, {z}) is not on the unit 2-sphere")]
    NotOnSphere { x: f64, y: f64, z: f64 },

    #[error("the north pole has no meaningful image under this projection")]
    NorthPole,

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),

    #[error("trial {trial}: closed form and direct product disagree by {residual:e}")]
    ClosedFormMismatch { trial: u64, residual: f64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("unknown verification suite {0:?} (expected algebra, topology, protocol or all)")]
    UnknownSuite(String),

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
