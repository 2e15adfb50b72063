use thiserror::Error;

use crate::freealg::{LetterClass, VarCounts};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable count mismatch: {left:?} vs {right:?}")]
    VarCountMismatch { left: VarCounts, right: VarCounts },

    #[error("expected {expected} images for class {class:?}, got {got}")]
    ImageCountMismatch {
        class: LetterClass,
        expected: usize,
        got: usize,
    },

    #[error("letter {class:?}{index} exceeds declared count {declared}")]
    LetterOutOfRange {
        class: LetterClass,
        index: usize,
        declared: usize,
    },

    #[error("polynomial already contains direction letters")]
    HasDirectionLetters,

    #[error("polynomial is not homogeneous of degree two in the direction letters")]
    NotDegreeTwoInDirection,

    #[error("polynomial is not symmetric")]
    NotSymmetric,

    #[error("degree {found} in {what} exceeds the allowed {allowed}")]
    DegreeTooHigh {
        what: &'static str,
        found: usize,
        allowed: usize,
    },

    #[error("border vector has no entry for {0}")]
    BorderTooSmall(String),

    #[error("matrix shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("missing direction tuple for {0}")]
    MissingDirection(&'static str),

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    AsymmetricMatrix(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("{0}")]
    HypothesisViolated(String),

    #[error("monomial {0} is not allowed in this decomposition")]
    ForbiddenMonomial(String),

    #[error("zero polynomial is not a valid input")]
    ZeroInput,

    #[error("internal identity failed: {0}")]
    Internal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
