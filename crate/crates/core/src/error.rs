use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("mesh error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("facet {facet}: {message}")]
    BadFacet { facet: usize, message: String },

    #[error("empty mesh")]
    EmptyMesh,

    #[error("parameter map error: {0}")]
    ParamMap(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid radar configuration: {0}")]
    Radar(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("raster format error: {0}")]
    Format(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("config error in field `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
