use std::path::PathBuf;

use masc_core::Error as CoreError;

/// Errors of the file formats, harness and command line.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Failure inside the numerical core.
    #[error(transparent)]
    Core(#[from] CoreError),

    /// Reading or writing a file failed.
    #[error("{}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },

    /// A file does not follow its format.
    #[error("{}: byte {offset}: {message}", path.display())]
    Format {
        /// Offending file.
        path: PathBuf,
        /// Byte offset of the problem.
        offset: usize,
        /// What was wrong.
        message: String,
    },

    /// A stored checksum does not match the content.
    #[error("{}: checksum mismatch (stored {stored:08x}, computed {computed:08x})", path.display())]
    Checksum {
        /// Offending file.
        path: PathBuf,
        /// Checksum found in the file, if any could be read.
        stored: u32,
        /// Checksum of the bytes actually present.
        computed: u32,
    },

    /// A configuration value is missing or out of range.
    #[error("configuration: {0}")]
    Config(String),

    /// Training failed in one cell of an experiment.
    #[error("p = {p}, run {run}: {source}")]
    Training {
        /// Corruption degree of the cell.
        p: f64,
        /// Run index.
        run: usize,
        /// Underlying error.
        source: CoreError,
    },

    /// An untrained control model did not score at chance.
    #[error("control integrity: {0}")]
    Control(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            offset,
            message: message.into(),
        }
    }

    /// Attaches a file name to a core format error.
    pub(crate) fn in_file(path: impl Into<PathBuf>, err: CoreError) -> Self {
        match err {
            CoreError::Format { offset, message } => Error::format(path, offset, message),
            other => Error::Core(other),
        }
    }

    /// Process exit code: 1 I/O, 2 configuration or invalid input,
    /// 3 numerical or training failure, 4 control integrity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::Config(_) | Error::Format { .. } | Error::Checksum { .. } => 2,
            Error::Core(e) | Error::Training { source: e, .. } => match e {
                CoreError::NoConvergence { .. } | CoreError::Diverged { .. } => 3,
                _ => 2,
            },
            Error::Control(_) => 4,
        }
    }
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;
