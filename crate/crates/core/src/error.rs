//! Unified error type; the CLI maps variants onto process exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatches, bad ranges, unknown names.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Trajectory generation failed, e.g. a non-finite blow-up mid-integration.
    #[error("generation error at step {step}: {message}")]
    Generation { step: usize, message: String },
    /// Text parse failure with a 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    /// Binary format violation: magic, truncation, inconsistent sizes.
    #[error("format error: {0}")]
    Format(String),
    /// Threshold calibration cannot succeed on this input.
    #[error("calibration error: {0}")]
    Calibration(String),
    /// Input is degenerate for the requested operation (zero variance, single class).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Not enough data for a statistically meaningful answer.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
