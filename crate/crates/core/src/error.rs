use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("negative value {value} at index {index} is not admissible for this transform")]
    NegativeValue { index: usize, value: f64 },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("dates are not consecutive days: {prev} followed by {next}")]
    DateGap { prev: chrono::NaiveDate, next: chrono::NaiveDate },

    #[error("optimizer did not converge after {restarts} restarts")]
    NonConvergence { restarts: usize },

    #[error("all candidate models failed to fit")]
    NoModel,

    #[error("undefined metric: {0}")]
    Undefined(&'static str),

    #[error("missing value for variable `{0}`")]
    MissingValue(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
