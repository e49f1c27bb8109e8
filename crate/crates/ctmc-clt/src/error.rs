use thiserror::Error;

/// Errors raised by chain construction, operator calculus, quadrature and
/// Monte Carlo routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a generator matrix: {0}")]
    NotAGenerator(String),
    #[error("generator is reducible: {0}")]
    Reducible(String),
    #[error("stationary null space is degenerate: {0}")]
    DegenerateStationary(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad example parameters: {0}")]
    BadParams(String),
    #[error("matrix is not pi-self-adjoint: deviation {0:.3e}")]
    NotSelfAdjoint(f64),
    #[error("negative spectrum: eigenvalue {0:.3e} below clip threshold")]
    NegativeSpectrum(f64),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("singular linear system (lambda={0})")]
    SingularSystem(f64),
    #[error("observable is not centered: |(f,1)| = {0:.3e}")]
    NotCentered(f64),
    #[error("quadrature failed to converge: {0}")]
    QuadratureNotConverged(String),
    #[error("sigma^2 = {0:.3e} is too small to standardize")]
    SigmaZero(f64),
    #[error("path was generated for a different chain ({0})")]
    PathChainMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
