//! Config-file loading. The format is TOML with one section per parameter
//! group (`[source]`, `[sample]`, `[channel]`, `[detector]`, `[sweep]`);
//! unknown keys are rejected. See `configs/` in the repository for worked
//! examples.

use std::fs;
use std::path::Path;

use etpa_core::domain::{validate_config, ExperimentConfig};

use crate::error::{CliError, CliResult};

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    validate_config(&config)?;
    Ok(config)
}

/// Raw bytes of the config file, for provenance hashing.
pub fn read_config_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
