use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Raised when a metallic permittivity is requested at ξ = 0.
    #[error("material `{0}` is a static metal (no finite permittivity at zero frequency)")]
    StaticMetal(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("{source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("material `{name}`: {message}")]
    InvalidMaterial { name: String, message: String },

    #[error("duplicate material name `{0}`")]
    DuplicateMaterial(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical { message: msg.into(), residual }
    }

    /// Prefix numerical and domain errors with where they happened, e.g. `T = 300 K, d = 1e-7 m`.
    pub fn context(self, ctx: impl fmt::Display) -> Self {
        match self {
            Error::Numerical { message, residual } => Error::Numerical {
                message: format!("{ctx}: {message}"),
                residual,
            },
            Error::Domain(message) => Error::Domain(format!("{ctx}: {message}")),
            other => other,
        }
    }

    /// Numerical failures map to exit code 3, everything else to 2.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}
