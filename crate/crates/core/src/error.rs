//! Error taxonomy shared across the toolkit.
//!
//! The variants map onto the CLI exit codes: parameter, input, format, and
//! I/O problems are exit 2; numerical failures (non-PSD spectra, undefined
//! correlations) are exit 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data violates a precondition (missing fields, bad shapes).
    #[error("invalid input: {0}")]
    Input(String),

    /// A file failed to parse; `location` is a line number or byte offset.
    #[error("format error in {path} ({location}): {message}")]
    Format {
        path: String,
        location: String,
        message: String,
    },

    /// A numerical invariant was violated during computation.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Rank correlation is undefined (zero rank variance).
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error is numerical (exit code 3) rather than an
    /// input/parameter problem (exit code 2).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::UndefinedCorrelation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
