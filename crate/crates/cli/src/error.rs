use gftsvd::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const NUMERICAL: u8 = 4;
    pub const CONTRACT: u8 = 5;
    pub const PARTIAL: u8 = 6;
    pub const FORMAT: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{failed} of {total} rows failed")]
    Partial { failed: usize, total: usize },
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => return io.into(),
                _ => unreachable!("checked above"),
            }
        }
        CliError::Format(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::DimensionMismatch(_)
        | Error::EmptyInput(_)
        | Error::LengthMismatch { .. }
        | Error::ZeroReference
        | Error::SilentSignal(_) => exit::USAGE,
        Error::Decomposition(_) | Error::Numerical(_) => exit::NUMERICAL,
        Error::FingerprintMismatch { .. } => exit::CONTRACT,
        Error::MalformedHeader(_)
        | Error::VersionMismatch { .. }
        | Error::Truncated { .. }
        | Error::MalformedWav(_)
        | Error::UnsupportedLayout(_)
        | Error::SampleRateMismatch { .. }
        | Error::Manifest { .. } => exit::FORMAT,
        Error::Io(_) => exit::IO,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Usage(_) => exit::USAGE,
            CliError::Format(_) => exit::FORMAT,
            CliError::Partial { .. } => exit::PARTIAL,
        }
    }
}
