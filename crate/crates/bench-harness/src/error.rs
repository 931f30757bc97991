use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("synthetic spec: {0}")]
    Spec(String),

    #[error("conflict rate must lie in [0, 1], got {0}")]
    RateOutOfRange(f64),

    #[error("class {class} has a single sample; conflict injection needs at least 2 per class")]
    ClassTooSmall { class: usize },

    #[error("conflict injection needs samples from at least two classes")]
    SingleClass,

    #[error("ROC AUC needs at least one flagged and one unflagged sample")]
    DegenerateAuc,

    #[error("ROC AUC scores must be finite")]
    NonFiniteScore,

    #[error("scores and flags disagree in length: {scores} vs {flags}")]
    ScoreFlagMismatch { scores: usize, flags: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: row {row}: expected {expected} columns, got {got}")]
    RaggedRow {
        path: String,
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("{path}: row {row}, column {col}: {reason}")]
    BadCell {
        path: String,
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("row count mismatch: {first} has {first_rows} rows but {second} has {second_rows}")]
    RowCountMismatch {
        first: String,
        first_rows: usize,
        second: String,
        second_rows: usize,
    },

    #[error("{path}: row {row}: unknown label `{text}` (labels are class ids 0, 1, ...)")]
    BadLabel {
        path: String,
        row: usize,
        text: String,
    },

    #[error("method {method}, seed {seed}: {source}")]
    RunFailed {
        method: String,
        seed: u64,
        #[source]
        source: Box<HarnessError>,
    },

    #[error(transparent)]
    Train(#[from] evidential_train::TrainError),

    #[error(transparent)]
    Fusion(#[from] fusion_ops::FusionError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
