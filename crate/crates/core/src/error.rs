use thiserror::Error;

/// Errors raised by any analysis in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no rows")]
    NoRows,

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("label not binary: column holds {0:?}")]
    LabelNotBinary(Vec<String>),

    #[error("unknown label token: positive token `{positive}` not among {found:?}")]
    UnknownLabel {
        positive: String,
        found: Vec<String>,
    },

    #[error("missing values in rows {rows:?}")]
    MissingValues { rows: Vec<usize> },

    #[error("column `{column}`, row {row}: `{value}` is not a finite number")]
    NotNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("bound undefined: single-class table (n_plus = {n_plus}, n_minus = {n_minus})")]
    SingleClass { n_plus: u64, n_minus: u64 },

    #[error("empty table")]
    EmptyTable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("labeling has no entry for pattern `{0}`")]
    MissingPattern(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no feasible start found (best constraint violation {0:.3e})")]
    Infeasible(f64),

    #[error("column `{0}` already exists")]
    NameCollision(String),

    #[error("metric/schema mismatch: {0}")]
    MetricMismatch(String),

    #[error("feature subset is empty")]
    EmptySubset,
}

pub type Result<T> = std::result::Result<T, Error>;
