use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the domain an operation accepts.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("reference signal has zero energy")]
    ZeroReference,

    #[error("signal has zero energy: {0}")]
    SilentSignal(&'static str),

    /// The matrix decomposition did not converge or produced factors that fail verification.
    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two objects that must share the same graph basis (or a file and its recorded hash) disagree.
    #[error("fingerprint mismatch ({context}): expected {expected}, found {found}")]
    FingerprintMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("malformed WAV file: {0}")]
    MalformedWav(String),

    #[error("unsupported audio layout: {0}")]
    UnsupportedLayout(String),

    #[error("sample rate mismatch: expected {expected} Hz, found {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },

    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
