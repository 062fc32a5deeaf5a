use std::io;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The command-line front end maps each variant onto a process exit code via
/// [`LscError::exit_code`].
#[derive(Debug, Error)]
pub enum LscError {
    #[error("invalid rank {0}: root systems need rank >= 1")]
    InvalidRank(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported interpolation level {0}: only levels 0 and 1 are defined")]
    UnsupportedLevel(u32),

    #[error("insufficient vectors: requested {requested} classes but only {available} vectors are available")]
    InsufficientVectors { requested: usize, available: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("label {label} at batch index {index} is out of range for {n_classes} classes")]
    LabelRange {
        index: usize,
        label: usize,
        n_classes: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("class {0} has no samples")]
    MissingClass(usize),

    #[error("center drift: extended center row {row} differs from the existing center matrix")]
    CenterDrift { row: usize },

    #[error("inconsistent provenance: {0}")]
    InconsistentProvenance(String),

    #[error("invalid k={k}: must be in 1..={n_classes}")]
    InvalidK { k: usize, n_classes: usize },

    #[error("capacity: {n_classes} classes do not fit; use rank >= {suggested_rank}")]
    Capacity {
        n_classes: usize,
        suggested_rank: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, LscError>;

/// Process exit codes used by the `lsc` binary.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const CONFIGURATION: i32 = 3;
    pub const DIVERGENCE: i32 = 4;
    pub const CAPACITY: i32 = 5;
}

impl LscError {
    pub fn exit_code(&self) -> i32 {
        use LscError::*;
        match self {
            Parse { .. } | Format(_) => exit_code::PARSE,
            Shape(_)
            | InvalidConfig(_)
            | InvalidArchitecture(_)
            | LabelRange { .. }
            | CenterDrift { .. }
            | InconsistentProvenance(_)
            | InvalidInput(_)
            | InvalidState(_)
            | InvalidRank(_)
            | UnsupportedLevel(_)
            | InvalidK { .. }
            | MissingClass(_)
            | Degenerate(_) => exit_code::CONFIGURATION,
            Divergence { .. } => exit_code::DIVERGENCE,
            Capacity { .. } | InsufficientVectors { .. } => exit_code::CAPACITY,
            EmptyInput(_) | Io(_) => exit_code::FAILURE,
        }
    }
}
