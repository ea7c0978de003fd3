use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed image {path}: {reason}")]
    MalformedImage { path: PathBuf, reason: String },
    #[error("non-binary pixel value {value} at ({x}, {y})")]
    NonBinary { x: u32, y: u32, value: u8 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("constant image: otsu threshold needs at least two distinct intensities")]
    ConstantImage,
    #[error("sample generation exhausted {retries} retries without satisfying label ranges")]
    RetryBudgetExhausted { retries: u32 },
    #[error("missing data: {0}")]
    Missing(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
