//! Command-line and HTTP front ends over [`reqrag_core::pipeline`].

pub mod commands;
pub mod http;

use std::fmt;
use std::path::{Path, PathBuf};

use reqrag_core::config::SystemConfig;
use reqrag_core::pipeline::PipelineError;

pub const DEFAULT_CONFIG_FILE: &str = "reqrag.toml";

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub const OPERATIONAL: u8 = 1;
    pub const USAGE: u8 = 2;

    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: Self::USAGE, error: error.into() }
    }

    pub fn operational(error: impl Into<anyhow::Error>) -> Self {
        Self { code: Self::OPERATIONAL, error: error.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) | PipelineError::Input(_) => Self::usage(e),
            _ => Self::operational(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Load `path`, or `./reqrag.toml` when present, or the built-in defaults
/// rooted at the current directory.
pub fn load_config(path: Option<&Path>) -> CliResult<SystemConfig> {
    let path: Option<PathBuf> = match path {
        Some(p) => Some(p.to_path_buf()),
        None => Some(PathBuf::from(DEFAULT_CONFIG_FILE)).filter(|p| p.exists()),
    };
    match path {
        Some(p) => SystemConfig::load(&p).map_err(CliError::usage),
        None => Ok(SystemConfig::default()),
    }
}
