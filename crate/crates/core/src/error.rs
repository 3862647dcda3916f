use gridiron_numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("plays out of order in game {game_id}: {detail}")]
    Ordering { game_id: String, detail: String },
    #[error("numerical error in {context}: {source}")]
    Numerics {
        context: String,
        #[source]
        source: NumericsError,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub fn numerics(context: impl Into<String>, source: NumericsError) -> Self {
        CoreError::Numerics {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 validation, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CoreError::Validation(_) => 2,
            CoreError::Numerics { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
