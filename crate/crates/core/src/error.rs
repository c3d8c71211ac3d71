use thiserror::Error;

/// Errors raised by the numerical kernels and the sweep driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A type invariant (Hermiticity, unit trace, positivity, layout) was violated.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A scalar function or temperature was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller supplied inconsistent arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// A configured resource cap (e.g. Hilbert-space dimension) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Every eigenvalue pair of a state family fell below the QFI cutoff.
    #[error("degenerate state family: no eigenvalue pair above cutoff {cutoff:e}")]
    DegenerateFamily { cutoff: f64 },

    /// Measurement optimization was requested on a subsystem it cannot handle.
    #[error("unsupported optimization: {0}")]
    UnsupportedOptimization(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit status for the command-line front end: 2 for usage,
    /// configuration and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) | Error::Io(_) | Error::Resource(_) => 2,
            _ => 3,
        }
    }
}
