use thiserror::Error;

use crate::geometry::RintCertificate;
use crate::likelihood::FitResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {what} = {value} (limit {limit})")]
    CapacityExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("no maximum likelihood estimate: target is {}", .certificate.verdict.describe())]
    NoMle { certificate: Box<RintCertificate> },

    #[error("Newton iteration did not converge in {} iterations (gradient norm {:e})", .best.iterations, .best.final_grad_norm)]
    NonConvergence { best: Box<FitResult> },

    #[error("target lies in the convex hull; no separating hyperplane exists")]
    NotSeparable { certificate: Box<RintCertificate> },

    #[error("trajectory bound violated at r = {r}: {detail}")]
    ViolatedBound { r: f64, detail: String },

    #[error("certificate failed verification: {0}")]
    Certificate(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::NoMle { .. } => 3,
            Error::CapacityExceeded { .. } => 4,
            Error::NonConvergence { .. } => 5,
            Error::NotSeparable { .. } => 6,
            Error::InvalidInput(_) => 7,
            Error::ViolatedBound { .. } | Error::Certificate(_) => 8,
            Error::Cache(_) | Error::Io(_) => 9,
        }
    }
}
