use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("delay {delay:e} s violates the cyclic-prefix bound {limit:e} s")]
    CyclicPrefix { delay: f64, limit: f64 },

    #[error("doppler {doppler} Hz outside the admissible range [{min}, {max}) Hz")]
    DopplerRange { doppler: f64, min: f64, max: f64 },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("size cap exceeded: {requested} elements requested, cap is {cap}")]
    SizeCap { requested: usize, cap: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("every path was dropped ({dropped} violated the cyclic prefix)")]
    EmptySet { dropped: usize },

    #[error("grid is empty")]
    EmptyGrid,

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("manifest error at `{path}`: {message}")]
    Manifest { path: String, message: String },

    #[error("missing blob {0}")]
    MissingBlob(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Decoding failures of the binary tensor container, one variant per defect.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"TBF1\"")]
    BadMagic([u8; 4]),

    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("tensors must have at least one dimension")]
    ZeroDims,

    #[error("{0} dimensions exceed the 255 the header can hold")]
    TooManyDims(usize),

    #[error("truncated header")]
    TruncatedHeader,

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),

    #[error("payload holds {found} values but dims require {expected}")]
    Length { expected: usize, found: usize },
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
