//! The `simulate` subcommand: expand the sweep, generate counts, and write
//! the counts CSV plus its provenance manifest.

use std::fs;
use std::path::{Path, PathBuf};

use etpa_core::domain::ExperimentConfig;
use etpa_core::montecarlo::{simulate, sweep_points, SimulationMode, SimulationPlan};

use crate::csvio::{write_counts, CsvRow};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

pub struct RunSummary {
    pub counts_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
}

pub struct RunOptions {
    pub mode: SimulationMode,
    pub seed_override: Option<u64>,
    pub replicas_override: Option<u32>,
}

pub fn run_simulation(
    mut config: ExperimentConfig,
    config_bytes: &[u8],
    out_dir: &Path,
    options: &RunOptions,
) -> CliResult<RunSummary> {
    if let Some(seed) = options.seed_override {
        config.base_seed = seed;
    }
    if let Some(replicas) = options.replicas_override {
        config.sweep.replicas = replicas;
    }
    let plan = SimulationPlan::new(config, options.mode);
    let records = simulate(&plan)?;

    // Records come out point-major, replica-minor; rebuild the identifiers
    // from that contract.
    let replicas = plan.replicas as usize;
    let rows: Vec<CsvRow> = records
        .iter()
        .enumerate()
        .map(|(i, record)| {
            let point = i / replicas;
            let replica = i % replicas;
            CsvRow::new(format!("pt{point:05}-r{replica:03}"), record)
        })
        .collect();

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("{}: {e}", out_dir.display())))?;
    let counts_path = out_dir.join("counts.csv");
    write_counts(&counts_path, &rows)?;

    let mode_name = match options.mode {
        SimulationMode::Rate => "rate",
        SimulationMode::Event => "event",
    };
    let manifest = Manifest::new(
        config_bytes,
        plan.base_seed,
        mode_name,
        plan.replicas,
        sweep_points(&plan.config).len(),
        rows.len(),
        "counts.csv",
    );
    let manifest_path = out_dir.join("manifest.toml");
    manifest.write(&manifest_path)?;

    Ok(RunSummary { counts_path, manifest_path, rows: rows.len() })
}
