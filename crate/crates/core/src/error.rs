use std::path::PathBuf;

use crate::solvers::SolveReport;

/// Errors raised by the phasetv library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid field dimensions {rows}x{cols}: both must be at least 2")]
    TooSmall { rows: usize, cols: usize },

    #[error("field data has {actual} values, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("index ({row}, {col}) lies beyond the single ghost layer of a {rows}x{cols} field")]
    OutOfGhostRange {
        row: isize,
        col: isize,
        rows: usize,
        cols: usize,
    },

    #[error("phase undefined at ({row}, {col}): both channels are zero")]
    UndefinedPhase { row: usize, col: usize },

    #[error("wrapped phase value {value} at ({row}, {col}) lies outside (-pi, pi]")]
    OutOfPhaseRange { row: usize, col: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot calibrate SNR: the signal has zero energy")]
    ZeroSignal,

    #[error("IQI undefined: the {channel} reference channel is identically zero")]
    ZeroReference { channel: &'static str },

    #[error("{method} diverged at iteration {iteration}: {reason}")]
    Diverged {
        method: &'static str,
        iteration: usize,
        reason: String,
        /// Trace accumulated up to the failing iteration.
        partial: Box<SolveReport>,
    },

    #[error("bad field file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("scene expression: {0}")]
    Expression(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
