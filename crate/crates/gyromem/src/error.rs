//! Crate-wide error type.
//!
//! Errors split into two families: problems with how the library was asked to
//! do something (`Config`, `Usage`) and problems encountered while doing it
//! (`KernelResolution`, `Io`, `Json`). The CLI maps the first family to exit
//! code 2 and the second to exit code 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration file was syntactically valid but semantically unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The caller asked for something the API cannot do (bad argument
    /// combinations, out-of-range sizes).
    #[error("usage error: {0}")]
    Usage(String),

    /// The kernel reconstruction grid is too coarse: the collocation diagonal
    /// left the region where the scheme is well conditioned. Rerun with at
    /// least `suggested` intervals.
    #[error("kernel grid too coarse for this wavenumber; retry with at least {suggested} intervals")]
    KernelResolution { suggested: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
