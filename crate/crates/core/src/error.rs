use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum SpredError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is not column-orthonormal (||P^T P - I||_F = {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("QR decomposition stayed rank deficient after {retries} resamples")]
    DegenerateQr { retries: usize },

    #[error("subspaces are at the cut locus (a principal angle equals pi/2)")]
    CutLocus,

    #[error("canonical embedding is ill-defined at interval {interval}: simplex {simplex:?} has no image in the target complex")]
    IllDefinedEmbedding { interval: usize, simplex: Vec<usize> },

    #[error("vertex {0} is not covered by the vertex map")]
    UnmappedVertex(usize),

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SpredError {
    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            SpredError::DegenerateQr { .. }
            | SpredError::CutLocus
            | SpredError::IllDefinedEmbedding { .. }
            | SpredError::NotOrthonormal { .. } => 3,
            SpredError::Config(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SpredError>;
