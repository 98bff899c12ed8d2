use std::path::PathBuf;

use gstrand_core::GStrandError;
use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("state became non-finite at step {step} (t = {t}); last good snapshot in {saved}")]
    BlowUp { step: usize, t: f64, saved: PathBuf },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Core(#[from] GStrandError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Snapshot { .. } | CliError::Core(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_FAILURE,
            CliError::BlowUp { .. } => EXIT_BLOWUP,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}
