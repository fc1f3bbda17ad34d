use std::io;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Shapes or lengths do not match what an operation expects.
    #[error("structural error: {0}")]
    Structural(String),
    /// A non-finite value showed up where a finite one is required.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A persisted file has a bad magic, version or shape header.
    #[error("format error: {0}")]
    Format(String),
    /// A scenario or run configuration is invalid.
    #[error("config error: {0}")]
    Config(String),
    /// The requested observation predates the first simulated slot.
    #[error("cold start: no observation available for slot {0}")]
    ColdStart(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
