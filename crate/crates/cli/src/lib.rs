//! Batch front end for majoflow: scenario parsing, subcommands and file formats.
//!
//! Exit codes: 0 success, 1 a computed verdict or invariant failed, 2 usage or parse error.

pub mod commands;
pub mod output;
pub mod scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] majoflow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Parse(_) | Self::Io(_) => 2,
            Self::Library(_) => 1,
        }
    }
}

/// Tolerance multiplier from `MAJOFLOW_TOL` (default 1).
pub fn tolerance_multiplier() -> Result<f64, CliError> {
    match std::env::var("MAJOFLOW_TOL") {
        Err(std::env::VarError::NotPresent) => Ok(1.0),
        Err(e) => Err(CliError::Usage(format!("MAJOFLOW_TOL: {e}"))),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(f) if f.is_finite() && f > 0.0 => Ok(f),
            _ => Err(CliError::Usage(format!(
                "MAJOFLOW_TOL must be a positive number, got {v:?}"
            ))),
        },
    }
}
