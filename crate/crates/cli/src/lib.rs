//! Library side of the `etpa` command-line harness: config loading, sweep
//! execution, the canonical counts CSV, analysis reports, external-data
//! ingestion, and delay-scan fitting. The binary in `main.rs` is a thin
//! argument parser over these functions.

pub mod analyze;
pub mod config;
pub mod csvio;
pub mod error;
pub mod homscan;
pub mod ingest;
pub mod manifest;
pub mod runsim;

pub use error::{CliError, CliResult};
