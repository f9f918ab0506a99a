use std::path::PathBuf;

use thiserror::Error;

use crate::panel::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: duplicate observation for unit {unit}, time {time}")]
    DuplicateObservation { line: u64, unit: Label, time: Label },

    #[error("line {line}: missing value in column `{column}`")]
    MissingValue { line: u64, column: String },

    #[error("line {line}: non-numeric value `{value}` in column `{column}`")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("unit {unit} has {periods} period(s); at least 2 are required")]
    TooFewPeriods { unit: Label, periods: usize },

    #[error("unit {unit}: times must be strictly increasing ({previous} then {next})")]
    UnorderedTimes {
        unit: Label,
        previous: Label,
        next: Label,
    },

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("X'X is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularDesign { condition: f64 },

    #[error("unit {unit} is perfectly leveraged: I - H_i is singular (condition number {condition:.3e})")]
    SingularBlock { unit: Label, condition: f64 },

    #[error("pair ({first}, {second}): Schur complement is singular (condition number {condition:.3e})")]
    SingularPair {
        first: Label,
        second: Label,
        condition: f64,
    },

    #[error("all residuals are zero; outlyingness is undefined for an exact fit")]
    ExactFit,

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error families, used for CLI exit codes and error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::SingularDesign { .. }
            | Error::SingularBlock { .. }
            | Error::SingularPair { .. }
            | Error::ExactFit => ErrorKind::Numerical,
            Error::Io { .. } => ErrorKind::Io,
            Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    /// Name of the pipeline stage that produced the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DuplicateObservation { .. }
            | Error::MissingValue { .. }
            | Error::NonNumeric { .. }
            | Error::TooFewPeriods { .. }
            | Error::UnorderedTimes { .. }
            | Error::MissingColumn(_)
            | Error::InvalidPanel(_)
            | Error::Csv(_) => "panel-core",
            Error::SingularDesign { .. } => "fe-estimator",
            Error::SingularBlock { .. } | Error::SingularPair { .. } => "deletion",
            Error::ExactFit => "influence",
            Error::InvalidConfig(_) | Error::Json(_) | Error::Io { .. } => "report-cli",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
