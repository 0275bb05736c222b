use alloc::string::String;

use thiserror::Error;

/// Errors produced by the analysis engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("setting pair ({x},{y}) has no observations")]
    EmptyBlock { x: usize, y: usize },

    #[error("invalid behavior table: {0}")]
    InvalidBehavior(String),

    #[error("invalid hidden-variable model: {0}")]
    InvalidModel(String),

    #[error("model carries no setting-dependent hidden-variable weights")]
    MissingSettingWeights,

    #[error("behavior is signalling: residual {residual:e} exceeds tolerance {tolerance:e}")]
    SignallingInput { residual: f64, tolerance: f64 },

    #[error("{what} index {index} out of range")]
    IndexOutOfRange { what: &'static str, index: usize },

    #[error("{undefined} of {total} resamples produced no CHSH value")]
    DegenerateResamples { undefined: usize, total: usize },

    #[error("no participant has trials in every setting block")]
    NoEligibleParticipants,

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("visibility {0} outside [0, 1]")]
    VisibilityOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{family} parameters out of domain: {reason}")]
    ParamOutOfDomain { family: &'static str, reason: String },

    #[error("rank {rank} outside support 1..={support}")]
    RankOutOfSupport { rank: u64, support: u64 },

    #[error("no optimizer start converged for {0}")]
    OptimizationFailed(&'static str),

    #[error("model selection needs at least two families, got {0}")]
    TooFewFamilies(usize),

    #[error("invalid rank table: {0}")]
    InvalidRankTable(String),

    #[error("level {index} is not strictly positive")]
    NonPositiveLevel { index: usize },

    #[error("need at least 3 levels, got {0}")]
    TooFewLevels(usize),

    #[error("holdout split left the training table empty")]
    DegenerateSplit,
}

pub type Result<T> = core::result::Result<T, Error>;
