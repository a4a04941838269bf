use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two shapes that must agree do not.
    #[error("{context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        /// What was being checked.
        context: &'static str,
        /// The required extent.
        expected: usize,
        /// The extent that was supplied.
        actual: usize,
    },

    /// A NaN or infinity was found where only finite values are allowed.
    #[error("non-finite value at flat index {index}")]
    NonFinite {
        /// Flat (row-major) position of the offending entry.
        index: usize,
    },

    /// An iterative decomposition hit its iteration cap.
    #[error("decomposition of a {rows}x{cols} matrix did not converge")]
    NoConvergence {
        /// Rows of the matrix being decomposed.
        rows: usize,
        /// Columns of the matrix being decomposed.
        cols: usize,
    },

    /// The training loss or a parameter became non-finite.
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    Diverged {
        /// 1-based epoch.
        epoch: usize,
        /// 0-based mini-batch index within the epoch.
        batch: usize,
    },

    /// A binary payload does not follow its format.
    #[error("format error at byte offset {offset}: {message}")]
    Format {
        /// Byte offset where parsing failed.
        offset: usize,
        /// What was wrong.
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Result alias for the core crate.
pub type Result<T> = core::result::Result<T, Error>;
