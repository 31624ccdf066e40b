//! Command-line front end for `aelim-core`: reads a TOML run configuration,
//! runs elimination, comparison or sweep pipelines and writes plot-ready
//! CSV and JSON files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_compare, cmd_eliminate, cmd_sweep};
pub use config::{Overrides, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure during {stage}: {source}")]
    Numerical {
        stage: &'static str,
        #[source]
        source: aelim_core::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 1,
            Self::Config(_) => 2,
            Self::Numerical { .. } => 3,
        }
    }

    /// Core errors caused by bad input are configuration errors, the rest
    /// are numerical failures.
    pub(crate) fn from_core(stage: &'static str, e: aelim_core::Error) -> Self {
        use aelim_core::Error as E;
        match e {
            E::InvalidInput(_) | E::InvalidTimes | E::NotNormalized { .. } => {
                Self::Config(format!("{stage}: {e}"))
            }
            source => Self::Numerical { stage, source },
        }
    }
}

pub(crate) trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for aelim_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(stage, e))
    }
}
