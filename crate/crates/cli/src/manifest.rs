//! Provenance manifest written next to every simulated counts file. Holds
//! everything needed to reproduce the CSV byte-for-byte: config hash, seed,
//! mode, and replica count. Deliberately timestamp-free so a rerun yields
//! identical output.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::csvio::COUNTS_HEADER;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub config_fnv1a64: String,
    pub base_seed: u64,
    pub mode: String,
    pub replicas: u32,
    pub sweep_points: usize,
    pub rows: usize,
    pub counts_file: String,
    pub csv_schema: String,
}

impl Manifest {
    pub fn new(
        config_bytes: &[u8],
        base_seed: u64,
        mode: &str,
        replicas: u32,
        sweep_points: usize,
        rows: usize,
        counts_file: &str,
    ) -> Manifest {
        Manifest {
            artifact: "etpa",
            version: env!("CARGO_PKG_VERSION"),
            config_fnv1a64: format!("{:016x}", fnv1a64(config_bytes)),
            base_seed,
            mode: mode.to_string(),
            replicas,
            sweep_points,
            rows,
            counts_file: counts_file.to_string(),
            csv_schema: COUNTS_HEADER.join(","),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| CliError::io(format!("manifest serialization: {e}")))?;
        fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

/// FNV-1a 64-bit content fingerprint. Not cryptographic; identifies the
/// exact config bytes a dataset came from.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // Standard FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
