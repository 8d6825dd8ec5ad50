use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters violate θ > 0, 1/2 < H < 1.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An argument lies outside the domain of a function or model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root bracket could not be established within the expansion cap.
    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value:e}, error {error:e})")]
    NonConvergence {
        subdivisions: usize,
        value: f64,
        error: f64,
    },

    /// Cholesky factorization failed even after maximal diagonal jitter.
    #[error("matrix is not positive definite (failed at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("empty input: {0}")]
    Empty(String),

    /// Estimator input carries no information (e.g. an all-zero path).
    #[error("degenerate path: {0}")]
    Degenerate(String),

    /// Too many replications of a Monte Carlo study failed.
    #[error("study aborted: {0}")]
    Study(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's parameters rather than by the
    /// numerics (these map to CLI exit code 1).
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parameter(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
