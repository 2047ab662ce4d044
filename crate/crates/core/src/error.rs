use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A physically infeasible parameter set (the protocol cannot be realized).
    #[error("infeasible: {reason}")]
    Infeasible { reason: String, bound: Option<f64> },

    /// The ODE integrator could not reach the requested accuracy.
    #[error("integrator failure at t = {t:e} s: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("numerical instability: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn infeasible(reason: impl Into<String>, bound: Option<f64>) -> Self {
        Error::Infeasible {
            reason: reason.into(),
            bound,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that indicate a bad request rather than a runtime fault.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::Domain(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
