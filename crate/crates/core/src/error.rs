use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid label {value:?} at row {row}")]
    InvalidLabel { value: String, row: usize },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("rejected row {row}: {message}")]
    RejectedRow { row: usize, message: String },

    #[error("station {station_id}: no measurements survive removal")]
    EmptySeries { station_id: String },

    #[error("linear fit needs at least 2 rows inside the quantile band, got {count}")]
    FitUnderdetermined { count: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("threshold optimization: no positive samples in any objective category")]
    UndefinedRecall,

    #[error("no length category contains positive samples")]
    NoPositives,

    #[error("station {station_id}: every candidate point was filtered out")]
    FullyFiltered { station_id: String },

    #[error("aligned sequences differ in length: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("synthetic generation: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
