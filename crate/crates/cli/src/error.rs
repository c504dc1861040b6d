use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] epiforecast::Error),

    #[error("unknown dataset `{name}`; available: {}", available.join(", "))]
    UnknownDataset { name: String, available: Vec<String> },

    #[error("source unreachable: {0}")]
    Unreachable(String),

    #[error("malformed remote payload: {0}")]
    Payload(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Input(String),

    #[error("no dates in common between `{actual}` and `{forecast}`")]
    EmptyIntersection { actual: String, forecast: String },

    #[error("io error on `{path}`: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
