use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A conformal factor was evaluated at one of its singular points or
    /// outside the region where its oracles are available.
    #[error("factor undefined at {point:?}: {reason}")]
    Undefined { point: [f64; 4], reason: String },

    /// The radial integrator could not continue.
    #[error("integration failed at t = {t}: {reason} (last state h = {h}, h' = {dh})")]
    Integration {
        t: f64,
        h: f64,
        dh: f64,
        reason: String,
    },

    /// Malformed input data (CSV, argument lists).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
