//! Error type shared by opinion and evidence constructors.

use thiserror::Error;

/// Why an opinion or evidence vector was rejected.
///
/// Values are reported as `f64` regardless of the scalar type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpinionError {
    #[error("domain must have at least one class")]
    EmptyDomain,

    #[error("{what} contains a non-finite value")]
    NonFinite { what: &'static str },

    #[error("{what}[{index}] = {value} is negative")]
    Negative {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("uncertainty {value} is negative")]
    NegativeUncertainty { value: f64 },

    #[error("beliefs and uncertainty sum to 1 with residual {residual:e}")]
    Additivity { residual: f64 },

    #[error("base rates sum to 1 with residual {residual:e}")]
    BaseRateSum { residual: f64 },

    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("dogmatic opinion (u = 0) has unbounded evidence")]
    DogmaticEvidence,
}
