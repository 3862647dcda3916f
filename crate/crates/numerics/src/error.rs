use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("design is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("class {class} has no observations with positive weight")]
    MissingClass { class: usize },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("smoothing-parameter search found no finite GCV score")]
    GcvExhausted,

    #[error("residual variance is zero; the fixed and group effects interpolate the response")]
    ZeroResidualVariance,
}

pub type Result<T> = std::result::Result<T, NumericsError>;
