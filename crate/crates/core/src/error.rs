use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A run breached one of its bookkeeping invariants. `state` carries a
    /// short dump of the world at the moment of failure.
    #[error("invariant violation at tick {tick}: {detail}\n{state}")]
    Invariant {
        tick: u32,
        detail: String,
        state: String,
    },
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the `rts` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) | SimError::UndefinedInput(_) => 2,
            SimError::Io { .. } | SimError::Csv { .. } => 3,
            SimError::Invariant { .. } => 4,
        }
    }
}
