//! Error type for fusion operations.

use sl_core::OpinionError;
use thiserror::Error;

/// Why a fusion or conflict computation failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("fusion needs at least {min} opinion(s), got {got}")]
    TooFewOpinions { min: usize, got: usize },

    #[error("opinions disagree on the number of classes: {first} vs {other}")]
    ClassMismatch { first: usize, other: usize },

    #[error("total belief conflict: the Dempster denominator 1 - Con is not positive")]
    TotalConflict,

    #[error("lambda must be positive, got {value}")]
    NonPositiveLambda { value: f64 },

    #[error("discount factor {value} is outside [0, 1]")]
    DiscountOutOfRange { value: f64 },

    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Opinion(#[from] OpinionError),
}
