//! Files, configuration and commands around `a2cmp-core`: checkpoints,
//! demonstration files, CSV exports, the run configuration and the
//! end-to-end pipeline.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod demos;
pub mod error;
pub mod export;
pub mod pipeline;

use std::{fs, path::Path};

pub use error::{CliError, Result};

/// Writes `bytes` to `path`, creating parent directories. The file appears
/// atomically, so an interrupted run never leaves a truncated artifact.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, bytes).map_err(CliError::io(path))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))
}
