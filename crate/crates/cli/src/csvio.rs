//! The canonical counts CSV: one flat schema serving both simulated and
//! ingested data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use etpa_core::domain::{Arm, CountRecord};

use crate::error::{CliError, CliResult};

/// Canonical column set, in order.
pub const COUNTS_HEADER: [&str; 12] = [
    "run_id",
    "arm",
    "delay_fs",
    "pump_mw",
    "concentration_molar",
    "integration_s",
    "singles1",
    "singles2",
    "coincidences",
    "dark1",
    "dark2",
    "seed",
];

/// One counts-CSV row: a [`CountRecord`] plus its run identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: String,
    pub arm: Arm,
    pub delay_fs: f64,
    pub pump_mw: f64,
    pub concentration_molar: f64,
    pub integration_s: f64,
    pub singles1: u64,
    pub singles2: u64,
    pub coincidences: u64,
    pub dark1: u64,
    pub dark2: u64,
    pub seed: u64,
}

impl CsvRow {
    pub fn new(run_id: String, record: &CountRecord) -> CsvRow {
        CsvRow {
            run_id,
            arm: record.arm,
            delay_fs: record.delay_fs,
            pump_mw: record.pump_mw,
            concentration_molar: record.concentration_molar,
            integration_s: record.integration_s,
            singles1: record.singles1,
            singles2: record.singles2,
            coincidences: record.coincidences,
            dark1: record.dark1,
            dark2: record.dark2,
            seed: record.seed,
        }
    }

    pub fn record(&self) -> CountRecord {
        CountRecord {
            arm: self.arm,
            delay_fs: self.delay_fs,
            pump_mw: self.pump_mw,
            concentration_molar: self.concentration_molar,
            integration_s: self.integration_s,
            singles1: self.singles1,
            singles2: self.singles2,
            coincidences: self.coincidences,
            dark1: self.dark1,
            dark2: self.dark2,
            seed: self.seed,
        }
    }
}

pub fn write_counts(path: &Path, rows: &[CsvRow]) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a counts CSV, requiring the canonical header bit-exactly.
pub fn read_counts(path: &Path) -> CliResult<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != COUNTS_HEADER {
        return Err(CliError::validation(format!(
            "{}: header does not match the counts schema\n  expected: {}\n  found:    {}",
            path.display(),
            COUNTS_HEADER.join(","),
            found.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, result) in reader.deserialize::<CsvRow>().enumerate() {
        let row: CsvRow =
            result.map_err(|e| CliError::validation(format!("row {}: {e}", i + 1)))?;
        row.record()
            .validate()
            .map_err(|e| CliError::validation(format!("row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

/// A generic plot-data point: `(x, y, yerr)` plus the series it belongs to.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    pub yerr: f64,
    pub series: String,
}

pub fn write_series(path: &Path, points: &[SeriesPoint]) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    for point in points {
        writer.serialize(point)?;
    }
    writer.flush()?;
    Ok(())
}
