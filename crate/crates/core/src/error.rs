use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GcsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(&'static str),

    #[error("Wigner evaluation at beta = ({re}, {im}) left imaginary residue {residue:e}")]
    NumericalConsistency { re: f64, im: f64, residue: f64 },

    #[error("non-finite partial sum in closed-form series at beta = ({re}, {im})")]
    Overflow { re: f64, im: f64 },

    #[error("quadrature did not converge after {levels} refinements (last {last}, previous {previous})")]
    Convergence {
        levels: usize,
        last: f64,
        previous: f64,
    },

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("I/O error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, GcsError>;

impl GcsError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GcsError::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        GcsError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GcsError::Io {
            path: path.into(),
            source,
        }
    }
}
