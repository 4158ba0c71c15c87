//! Crate-wide error type.
//!
//! Variants map onto the CLI exit codes: configuration and argument
//! problems exit with 2, numerical/convergence failures with 3, and
//! self-check property failures with 4.

use std::fmt;

/// Errors produced by any part of the library.
#[derive(Debug)]
pub enum Error {
    /// Invalid configuration value or file (exit code 2).
    Config(String),
    /// Invalid argument combination passed to an operation (exit code 2).
    Argument(String),
    /// A numerical kernel failed (singular matrix, eigensolver breakdown,
    /// stabilizability failure); exit code 3.
    Numerical(String),
    /// An iteration did not converge; carries the residual/increment
    /// history for diagnosis (exit code 3).
    Convergence { what: String, history: Vec<f64> },
    /// A self-check property failed (exit code 4).
    Property(String),
    /// Filesystem problem while reading configs or writing artifacts
    /// (exit code 2).
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) | Error::Io(_) => 2,
            Error::Numerical(_) | Error::Convergence { .. } => 3,
            Error::Property(_) => 4,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Argument(msg) => write!(f, "argument error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
            Error::Convergence { what, history } => {
                write!(f, "convergence failure in {what}; residual history: ")?;
                for (i, r) in history.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{r:.3e}")?;
                }
                Ok(())
            }
            Error::Property(msg) => write!(f, "property failure: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
