use fusion_ops::FusionError;
use thiserror::Error;

/// Errors produced while validating data, evaluating losses, or training.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("length mismatch in {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Dirichlet parameters must satisfy alpha_k >= 1 (evidence >= 0).
    #[error("alpha[{index}] = {value} is below 1")]
    AlphaBelowOne { index: usize, value: f64 },

    #[error("labels must be one-hot: {reason}")]
    MalformedLabel { reason: String },

    #[error("batch is empty")]
    EmptyBatch,

    #[error("batch has no views")]
    NoViews,

    #[error("view {view} has {got} samples, expected {expected}")]
    SampleCountMismatch {
        view: usize,
        expected: usize,
        got: usize,
    },

    #[error("view {view}, sample {sample}: feature width {got}, expected {expected}")]
    FeatureWidthMismatch {
        view: usize,
        sample: usize,
        expected: usize,
        got: usize,
    },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("conflict flags have length {got}, expected {expected}")]
    FlagLengthMismatch { expected: usize, got: usize },

    #[error("batch has {batch} views but the network expects {network}")]
    ViewCountMismatch { batch: usize, network: usize },

    #[error("view {view}: batch feature width {batch} but the network expects {network}")]
    InputDimMismatch {
        view: usize,
        batch: usize,
        network: usize,
    },

    #[error("batch has {batch} classes but the network outputs {network}")]
    ClassCountMismatch { batch: usize, network: usize },

    #[error("non-finite loss at epoch {epoch}, batch {batch}: {value}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        value: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Fusion(#[from] FusionError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
