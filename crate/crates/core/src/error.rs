use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("starting vector is zero")]
    ZeroVector,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("H + {shift}I is numerically singular")]
    SingularShift { shift: f64 },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("operator is not Hermitian")]
    NotHermitian,

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error(
        "spectral anchor nu = {nu} lies outside the region of absolute convergence \
         (abscissa {abscissa}{})",
        if *closed { ", closed boundary" } else { "" }
    )]
    OutsideConvergenceRegion { nu: f64, abscissa: f64, closed: bool },

    #[error(
        "adaptive quadrature did not converge within {intervals} intervals \
         (error estimate {estimate:e}, target {target:e})"
    )]
    QuadratureDivergence { intervals: usize, estimate: f64, target: f64 },

    #[error("{solver} did not converge: {reason}")]
    NoConvergence { solver: &'static str, reason: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("matrix market, line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("vector file: {0}")]
    VectorFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
