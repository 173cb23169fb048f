use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario has {count} coordinates, above the configured limit of {limit}")]
    SizeLimit { count: u128, limit: usize },

    #[error("setting/outcome pair is incompatible: {0}")]
    Incompatible(String),

    #[error("scenario mismatch: expected {expected}, got {actual}")]
    ScenarioMismatch { expected: String, actual: String },

    #[error("column count mismatch: {left} vs {right}")]
    ColumnMismatch { left: usize, right: usize },

    #[error("inconsistent equality system: coefficient rank {rank}, augmented rank {augmented_rank}")]
    Inconsistent { rank: usize, augmented_rank: usize },

    #[error("no relative-interior point: uniform distribution violates `{0}`")]
    NoInteriorPoint(String),

    #[error("distribution violates normalization row `{label}` by {residual:e}")]
    NotNormalized { label: String, residual: f64 },

    #[error("distribution violates arrow-of-time row `{label}` by {residual:e}")]
    AotViolation { label: String, residual: f64 },

    #[error("quantum construction failed: {0}")]
    Construction(String),

    #[error("enumeration limit exceeded: {count} items, limit {limit}")]
    EnumerationLimit { count: u128, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
