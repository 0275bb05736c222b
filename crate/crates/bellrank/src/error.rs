use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// Failures surfaced by the command-line front end.
///
/// Exit codes: `1` when the analysis itself is infeasible for valid input,
/// `2` for usage, I/O and schema problems.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Schema { path: PathBuf, line: Option<u64>, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Analysis(#[from] bellrank_core::Error),
}

/// Machine-readable error object written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorObject {
    pub error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    pub exit_code: i32,
}

impl CliError {
    pub fn schema(path: impl Into<PathBuf>, line: Option<u64>, message: impl Into<String>) -> Self {
        CliError::Schema { path: path.into(), line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Usage(_) | CliError::Schema { .. } | CliError::Io { .. } => 2,
        }
    }

    pub fn to_object(&self) -> ErrorObject {
        let (error, kind, path, line) = match self {
            CliError::Usage(_) => ("UsageError", None, None, None),
            CliError::Schema { path, line, .. } => ("SchemaViolation", None, Some(path), *line),
            CliError::Io { path, .. } => ("IoError", None, Some(path), None),
            CliError::Analysis(e) => ("AnalysisInfeasible", Some(analysis_kind(e)), None, None),
        };
        ErrorObject {
            error,
            kind: kind.map(String::from),
            message: match self {
                CliError::Schema { message, .. } => message.clone(),
                other => other.to_string(),
            },
            path: path.map(|p| p.display().to_string()),
            line,
            exit_code: self.exit_code(),
        }
    }
}

fn analysis_kind(e: &bellrank_core::Error) -> &'static str {
    use bellrank_core::Error as E;
    match e {
        E::EmptyBlock { .. } => "EmptyBlock",
        E::InvalidBehavior(_) => "InvalidBehavior",
        E::InvalidModel(_) => "InvalidModel",
        E::MissingSettingWeights => "MissingSettingWeights",
        E::SignallingInput { .. } => "SignallingInput",
        E::IndexOutOfRange { .. } => "IndexOutOfRange",
        E::DegenerateResamples { .. } => "DegenerateResamples",
        E::NoEligibleParticipants => "NoEligibleParticipants",
        E::ZeroVariance => "ZeroVariance",
        E::TooFewSamples { .. } => "TooFewSamples",
        E::VisibilityOutOfRange(_) => "VisibilityOutOfRange",
        E::InvalidArgument(_) => "InvalidArgument",
        E::ParamOutOfDomain { .. } => "ParamOutOfDomain",
        E::RankOutOfSupport { .. } => "RankOutOfSupport",
        E::OptimizationFailed(_) => "OptimizationFailed",
        E::TooFewFamilies(_) => "TooFewFamilies",
        E::InvalidRankTable(_) => "InvalidRankTable",
        E::NonPositiveLevel { .. } => "NonPositiveLevel",
        E::TooFewLevels(_) => "TooFewLevels",
        E::DegenerateSplit => "DegenerateSplit",
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
