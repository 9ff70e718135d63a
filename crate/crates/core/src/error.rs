use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Overlapping or touching spheres, or other impossible placements.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A discretization was requested that cannot be built, e.g. an image
    /// line that does not fit between the proxy sphere and the accumulation
    /// point.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("singular kernel evaluation: {0}")]
    SingularEvaluation(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("infeasible packing: {0}")]
    InfeasiblePacking(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("point {point} lies inside particle {particle}")]
    Domain { point: usize, particle: usize },

    #[error("schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },

    #[error("parameter `{field}` out of range: {msg}")]
    Range { field: String, msg: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
