use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
///
/// The variants map one-to-one onto the CLI exit codes: input problems
/// exit with 2, accuracy problems with 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: non-finite entries, wrong shapes, bad CSV.
    #[error("input error: {0}")]
    Input(String),
    /// Input is well formed but outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Value outside the representable or admissible range.
    #[error("range error: {0}")]
    Range(String),
    /// A linear-algebra or floating-point breakdown.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The requested accuracy could not be certified.
    #[error("accuracy error: {message} (estimated error {estimate:.3e})")]
    Accuracy { message: String, estimate: f64 },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn accuracy(message: impl Into<String>, estimate: f64) -> Self {
        Error::Accuracy {
            message: message.into(),
            estimate,
        }
    }

    /// Process exit code for this error under the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Accuracy { .. } | Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Input(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Input(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
