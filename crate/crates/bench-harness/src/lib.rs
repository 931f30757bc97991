//! Benchmark harness for multimodal evidential classifiers: synthetic data
//! with controllable cluster separation and noise, modality-swap conflict
//! injection, accuracy / uncertainty / conflict-detection-AUC metrics, and
//! an experiment runner that sweeps fusion methods and seeds in parallel.
//!
//! The `bench` binary in this crate exposes the whole pipeline on the
//! command line.

pub mod csv_io;
pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod report;
pub mod svg;

pub use csv_io::{load_feature_csv, load_labels_csv, load_matrix_csv, Standardizer};
pub use data::{
    generate_synthetic, inject_conflict, nearest_center_accuracy, SyntheticDataset, SyntheticSpec,
};
pub use error::HarnessError;
pub use evidential_train::MultimodalBatch;
pub use experiment::{run_experiment, run_jobs, summarize, ExperimentConfig, RunResult};
pub use metrics::{evaluate, fused_scores, roc_auc, EvaluationFragment, SampleStats};
pub use report::{seed_stat, summarize_method, ExperimentReport, MethodSummary, SeedStat};
pub use svg::uncertainty_histogram_svg;
