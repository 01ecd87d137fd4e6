use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("table has no rows")]
    EmptyTable,

    #[error("non-finite value at row {row}, column {column:?}")]
    NonFinite { row: usize, column: String },

    #[error("column mismatch: scaler expects {expected} attributes, table has {found}")]
    ColumnMismatch { expected: usize, found: usize },

    #[error("bin count must be at least 1")]
    ZeroBins,

    #[error("agenda size bound {alpha} invalid for {num_attributes} attributes")]
    AlphaTooLarge { alpha: usize, num_attributes: usize },

    #[error("duplicate agenda {0:?}")]
    DuplicateAgenda(String),

    #[error("agenda is empty")]
    EmptyAgenda,

    #[error("agenda space is empty")]
    EmptyAgendaSpace,

    #[error("weight {index} is negative ({value}); a mass function needs non-negative weights")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to zero")]
    ZeroMass,

    #[error("gamma must be finite and positive, got {0}")]
    InvalidGamma(f64),

    #[error("balance factor must be positive, got {0}")]
    NonPositiveBal(f64),

    #[error("training labels contain no outliers")]
    NoOutliersInTrain,

    #[error("labels contain only one class")]
    DegenerateLabels,

    #[error("label vector is empty")]
    EmptyLabels,

    #[error("unknown object {0:?}")]
    UnknownObject(String),

    #[error("unknown agenda {0:?}")]
    UnknownAgenda(String),

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("invalid attribute pair ({0}, {1})")]
    InvalidAttributePair(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("heatmap cell ({row}, {col}) holds objects with different closure sizes")]
    InconsistentCell { row: usize, col: usize },

    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: {message}")]
    Input { path: String, message: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
