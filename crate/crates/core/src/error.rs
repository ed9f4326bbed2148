use std::io;

use thiserror::Error;

/// Errors produced by every layer of the crate.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`])
/// which the CLI embeds in its error JSON.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed npy header: {0}")]
    MalformedHeader(String),
    #[error("unsupported dtype {0:?}: only little-endian float32 ('<f4') is accepted")]
    UnsupportedDtype(String),
    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),
    #[error("non-finite value at row {row}, col {col}")]
    NonFiniteData { row: usize, col: usize },
    #[error("shape ({rows}, {cols}) does not match data length {len}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("index set invalid: {0}")]
    InvalidIndexSet(String),
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("focal set is empty")]
    EmptyFocal,
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("retained set is empty")]
    EmptyRetained,
    #[error("token budget {n_target} is below focal count {focal_count}")]
    BudgetBelowFocal { n_target: usize, focal_count: usize },
    #[error("invalid token budget: {0}")]
    BudgetInvalid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid FLOPs model: {0}")]
    InvalidModel(String),
    #[error("invalid scene parameters: {0}")]
    InvalidParams(String),
    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),
    #[error("JSON failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::UnsupportedDtype(_) => "UnsupportedDtype",
            Error::UnsupportedLayout(_) => "UnsupportedLayout",
            Error::NonFiniteData { .. } => "NonFiniteData",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::ZeroDimension => "ZeroDimension",
            Error::InvalidIndexSet(_) => "InvalidIndexSet",
            Error::EmptyInput => "EmptyInput",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyFocal => "EmptyFocal",
            Error::EmptyCandidates => "EmptyCandidates",
            Error::EmptyRetained => "EmptyRetained",
            Error::BudgetBelowFocal { .. } => "BudgetBelowFocal",
            Error::BudgetInvalid(_) => "BudgetInvalid",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Io(_) => "IoFailure",
            Error::Json(_) => "JsonFailure",
        }
    }

    /// True for failures of the environment rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
