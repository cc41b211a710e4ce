use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh resolution n = {0} (must be >= 1)")]
    InvalidResolution(usize),

    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("space {kind} is not available in {dim}D")]
    UnsupportedSpace { kind: String, dim: usize },

    #[error("spaces {from} -> {to} are not adjacent in the discrete complex")]
    NotAdjacent { from: String, to: String },

    #[error("index ({row}, {col}) out of range for {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cell index {0} out of range")]
    CellOutOfRange(usize),

    #[error("singular matrix (pivot {pivot} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:.3e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("meshes are not nested: coarse n = {coarse}, reference n = {fine}")]
    NotNested { coarse: usize, fine: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
