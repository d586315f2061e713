use thiserror::Error;

use crate::model::ModelError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} is not primitive")]
    NotPrimitive(&'static str),

    #[error("eigen-solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("x = {x} is outside the rate-function domain (no tilt with |t| <= {bound} reaches it)")]
    OutOfDomain { x: f64, bound: f64 },

    #[error("tilt parameter t = {t} exceeds the configured bound {bound}")]
    TiltOutOfRange { t: f64, bound: f64 },

    #[error("n = {n} exceeds the limit {max} for this computation")]
    TooLarge { n: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Model(_) | Error::Io { .. } | Error::InvalidArgument(_) | Error::TooLarge { .. } => 1,
            Error::NotPrimitive(_) => 2,
            Error::NonConvergence { .. } => 3,
            Error::OutOfDomain { .. } | Error::TiltOutOfRange { .. } => 4,
        }
    }
}
