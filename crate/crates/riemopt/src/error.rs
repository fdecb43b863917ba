use thiserror::Error;

/// Errors shared across the linear algebra kernel, manifolds, optimizers and bench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("rank-deficient input at column {col}")]
    RankDeficient { col: usize },
    #[error("singular triangular factor at row {row}")]
    Singular { row: usize },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("cut locus: {0}")]
    CutLocus(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("non-finite objective value")]
    NonFiniteObjective,
    #[error("index error: {0}")]
    Index(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("unknown problem: {0}")]
    UnknownProblem(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
