//! Error taxonomy shared by the library and the CLI.
//!
//! Variants map onto the CLI's category-coded exit statuses, so a caller
//! can tell a malformed config apart from a broken strategy contract or a
//! corrupted episode without parsing message text.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A function argument is out of its documented range (bad index,
    /// delta outside (0,1), K > horizon, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A config file or inline config violates the schema. The message
    /// names the offending field or matrix cell.
    #[error("invalid config: {0}")]
    Config(String),

    /// A strategy was wired up in a way its contract forbids (for example
    /// a stochastic agent against the mirror adversary).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The environment re-observed a known payoff cell with a different
    /// value. In a repeated game this can only mean an engine bug or a
    /// non-repeated environment.
    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI. 0 = success and 2 = usage error are
    /// produced elsewhere; everything here is 3..=6.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) => 3,
            Error::Contract(_) => 4,
            Error::Integrity(_) => 5,
            Error::Io(_) | Error::Json(_) => 6,
        }
    }
}
