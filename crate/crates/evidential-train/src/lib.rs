//! Training for per-view evidential classifiers.
//!
//! Each view (modality) gets a small fully connected network whose
//! capped-exponential outputs are Dirichlet evidence. The training
//! objective combines the fused accuracy loss, per-view accuracy losses,
//! an annealed KL regularizer, and a pairwise consistency penalty; its
//! gradient is computed by a recorded reverse-mode tape that differentiates
//! through the chosen fusion operator.

pub mod config;
pub mod data;
pub mod error;
pub mod loss;
pub mod network;
pub mod special;
pub mod tape;
pub mod train;

pub use config::TrainConfig;
pub use data::MultimodalBatch;
pub use fusion_ops::FusionMethod;
pub use error::TrainError;
pub use loss::{
    annealing_coef, loss_ace, loss_consistency, loss_kl, loss_trace, total_loss, LossBreakdown,
    LossSettings, LossTrace,
};
pub use network::{EvidentialNetwork, ViewNet};
pub use special::{capped_exp, capped_exp_derivative, digamma, lgamma, trigamma, EVIDENCE_CAP};
pub use tape::{Gradients, Tape, Var};
pub use train::{train, write_loss_history, TrainOutcome};
