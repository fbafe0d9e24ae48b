use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("iterative solver failed to converge: {0}")]
    NonConvergence(String),
    #[error("operator is singular or breakdown detected: {0}")]
    SingularOperator(String),
    #[error("mesh quality failure: {0}")]
    MeshQualityFailure(String),
    #[error("singular-value gap {gap:.3e} below 10; mesh too coarse to separate the kernel")]
    KernelGapFailure { gap: f64 },
    #[error("Newton iteration diverged: {0}")]
    NewtonDivergence(String),
    #[error("linearization singular during solve: {0}")]
    SingularLinearization(String),
    #[error("connection assembled from unsolved state: |G| = {0:.3e}")]
    UnsolvedState(f64),
    #[error("no mesh path found: {0}")]
    PathNotFound(String),
    #[error("mesh mismatch between operands")]
    MeshMismatch,
    #[error("Gram matrix numerically degenerate: {0}")]
    DegenerateGram(String),
    #[error("config error: {0}")]
    ConfigParseError(String),
    #[error("missing report: {0}")]
    MissingReport(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
