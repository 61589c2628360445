use std::fmt;

use crate::optim::SolverReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Inputs for which an algorithm has no meaningful output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateKind {
    /// The signal (or an estimate of it) is the zero vector.
    ZeroSignal,
    /// Hard thresholding produced an all-zero coefficient vector.
    ZeroThresholded,
    /// `⟨τ, y⟩ = 0`, so the magnitude cannot be recovered.
    ZeroThresholdCorrelation,
    /// The lifted coordinate `û` of the lifted LP solution vanished.
    ZeroLiftedCoordinate,
}

impl fmt::Display for DegenerateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DegenerateKind::ZeroSignal => "zero signal",
            DegenerateKind::ZeroThresholded => "thresholded vector is zero",
            DegenerateKind::ZeroThresholdCorrelation => "<tau, y> = 0",
            DegenerateKind::ZeroLiftedCoordinate => "lifted coordinate u = 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(DegenerateKind),

    #[error("solver did not reach optimality: {0:?}")]
    Solver(SolverReport),

    #[error("post-solve constraint check failed: {0}")]
    ConstraintViolation(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            actual,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_))
    }
}
