use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// What is wrong with one input row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueKind {
    NonFiniteValue,
    NegativeValue,
    DuplicateId,
    OffGridCue,
}

impl IssueKind {
    pub fn code(self) -> &'static str {
        match self {
            IssueKind::NonFiniteValue => "NON_FINITE_VALUE",
            IssueKind::NegativeValue => "NEGATIVE_VALUE",
            IssueKind::DuplicateId => "DUPLICATE_ID",
            IssueKind::OffGridCue => "OFF_GRID_CUE",
        }
    }
}

/// A single offending row. `row` is the zero-based position in the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowIssue {
    pub row: usize,
    pub id: Option<String>,
    pub kind: IssueKind,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "row {} ({}): {}", self.row, id, self.kind.code()),
            None => write!(f, "row {}: {}", self.row, self.kind.code()),
        }
    }
}

fn join_issues(issues: &[RowIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("invalid rows: {}", join_issues(.0))]
    InvalidRows(Vec<RowIssue>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate distribution: {0}")]
    DegenerateSpec(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("outcomes are completely separated by price; the logistic MLE does not exist")]
    CompleteSeparation,

    #[error("all outcomes belong to a single class")]
    NoVariation,

    #[error("logistic fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("demand slope {slope} is not negative")]
    NonNegativeSlope { slope: f64 },

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("{discarded} of {total} coefficient draws had a non-negative slope")]
    TooManyDiscards { discarded: usize, total: usize },

    #[error("{failed} of {total} bootstrap replicates failed")]
    TooManyFailedReplicates { failed: usize, total: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema mismatch{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    SchemaMismatch {
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EMPTY_INPUT",
            Error::InvalidRows(issues) => issues
                .first()
                .map(|i| i.kind.code())
                .unwrap_or("INVALID_ROWS"),
            Error::InvalidConfig(_) => "INVALID_CONFIG",
            Error::DegenerateSpec(_) => "DEGENERATE_SPEC",
            Error::InsufficientData(_) => "INSUFFICIENT_DATA",
            Error::CompleteSeparation => "COMPLETE_SEPARATION",
            Error::NoVariation => "NO_VARIATION",
            Error::NonConvergence { .. } => "NON_CONVERGENCE",
            Error::NonNegativeSlope { .. } => "NON_NEGATIVE_SLOPE",
            Error::ZeroVariance => "ZERO_VARIANCE",
            Error::TooManyDiscards { .. } => "TOO_MANY_DISCARDS",
            Error::TooManyFailedReplicates { .. } => "TOO_MANY_FAILED_REPLICATES",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::SchemaMismatch { .. } => "SCHEMA_MISMATCH",
            Error::Io(_) => "IO_ERROR",
            Error::Csv(_) => "PARSE_ERROR",
        }
    }

    /// True for errors caused by malformed input or configuration, as opposed
    /// to estimation failures on well-formed data.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput
                | Error::InvalidRows(_)
                | Error::InvalidConfig(_)
                | Error::DegenerateSpec(_)
                | Error::Parse { .. }
                | Error::SchemaMismatch { .. }
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}
