use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum H2Error {
    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cluster trees do not match: {0}")]
    TreeMismatch(String),

    #[error("cluster {0} is a leaf and cannot be split")]
    LeafCluster(usize),

    #[error("dense conversion of a {rows}x{cols} matrix exceeds the limit of {limit}")]
    DenseLimit { rows: usize, cols: usize, limit: usize },

    #[error("target block tree is not a coarsening of the product structure at block ({row}, {col})")]
    NotCoarsening { row: usize, col: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid serialized data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, H2Error>;
