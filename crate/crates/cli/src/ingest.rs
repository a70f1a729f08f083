//! The `ingest` subcommand: normalize an externally produced counts CSV
//! into the canonical schema.
//!
//! The input must carry the documented column names (any order). `dark1`,
//! `dark2`, and `seed` may be omitted; missing dark columns default to 0
//! with a warning. An optional leading comment line declares units:
//!
//! ```text
//! # units: delay=ps pump=uW concentration=uM time=s
//! ```
//!
//! Unlisted axes default to the canonical units (fs, mW, M, s). Rows that
//! violate the count invariants are rejected individually with a
//! diagnostic; schema problems reject the whole file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use etpa_core::domain::Arm;

use crate::csvio::CsvRow;
use crate::error::{CliError, CliResult};

const REQUIRED_COLUMNS: [&str; 9] = [
    "run_id",
    "arm",
    "delay_fs",
    "pump_mw",
    "concentration_molar",
    "integration_s",
    "singles1",
    "singles2",
    "coincidences",
];
const OPTIONAL_COLUMNS: [&str; 3] = ["dark1", "dark2", "seed"];

#[derive(Debug, Clone, Copy)]
struct UnitScales {
    delay_to_fs: f64,
    pump_to_mw: f64,
    concentration_to_molar: f64,
    time_to_s: f64,
}

impl Default for UnitScales {
    fn default() -> Self {
        UnitScales { delay_to_fs: 1.0, pump_to_mw: 1.0, concentration_to_molar: 1.0, time_to_s: 1.0 }
    }
}

fn parse_units(line: &str) -> CliResult<UnitScales> {
    let mut scales = UnitScales::default();
    let body = line.trim_start_matches('#').trim();
    let body = body.strip_prefix("units:").unwrap_or(body).trim();
    for token in body.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| {
            CliError::validation(format!("units line: expected key=value, got \"{token}\""))
        })?;
        match key {
            "delay" => {
                scales.delay_to_fs = match value {
                    "fs" => 1.0,
                    "ps" => 1e3,
                    other => return Err(unknown_unit("delay", other, "fs, ps")),
                }
            }
            "pump" => {
                scales.pump_to_mw = match value {
                    "mW" => 1.0,
                    "uW" => 1e-3,
                    "W" => 1e3,
                    other => return Err(unknown_unit("pump", other, "mW, uW, W")),
                }
            }
            "concentration" => {
                scales.concentration_to_molar = match value {
                    "M" => 1.0,
                    "mM" => 1e-3,
                    "uM" => 1e-6,
                    "nM" => 1e-9,
                    other => return Err(unknown_unit("concentration", other, "M, mM, uM, nM")),
                }
            }
            "time" => {
                scales.time_to_s = match value {
                    "s" => 1.0,
                    "ms" => 1e-3,
                    "min" => 60.0,
                    other => return Err(unknown_unit("time", other, "s, ms, min")),
                }
            }
            other => {
                return Err(CliError::validation(format!(
                    "units line: unknown axis \"{other}\" (expected delay, pump, concentration, time)"
                )))
            }
        }
    }
    Ok(scales)
}

fn unknown_unit(axis: &str, got: &str, expected: &str) -> CliError {
    CliError::validation(format!("units line: unknown {axis} unit \"{got}\" (expected {expected})"))
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub rows: Vec<CsvRow>,
    pub warnings: Vec<String>,
    /// One diagnostic per rejected row.
    pub rejected: Vec<String>,
}

pub fn ingest_file(path: &Path) -> CliResult<IngestOutcome> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    ingest_str(&text)
}

pub fn ingest_str(text: &str) -> CliResult<IngestOutcome> {
    let mut scales = UnitScales::default();
    let mut body_start = 0;
    for line in text.lines() {
        if line.starts_with('#') {
            if line.trim_start_matches('#').trim_start().starts_with("units:") {
                scales = parse_units(line)?;
            }
            body_start += line.len() + 1;
        } else {
            break;
        }
    }
    let body = &text[body_start.min(text.len())..];

    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = reader.headers().map_err(CliError::from)?.clone();
    let mut warnings = Vec::new();

    let column = |name: &str| headers.iter().position(|h| h == name);
    for header in headers.iter() {
        if !REQUIRED_COLUMNS.contains(&header) && !OPTIONAL_COLUMNS.contains(&header) {
            return Err(CliError::validation(format!(
                "unknown column \"{header}\" (schema: {})",
                REQUIRED_COLUMNS
                    .iter()
                    .chain(OPTIONAL_COLUMNS.iter())
                    .copied()
                    .collect::<Vec<_>>()
                    .join(",")
            )));
        }
    }
    let mut indices = Vec::new();
    for name in REQUIRED_COLUMNS {
        match column(name) {
            Some(i) => indices.push(i),
            None => {
                return Err(CliError::validation(format!("missing required column \"{name}\"")))
            }
        }
    }
    let dark1_index = column("dark1");
    let dark2_index = column("dark2");
    let seed_index = column("seed");
    if dark1_index.is_none() || dark2_index.is_none() {
        warnings.push("dark columns missing; dark counts default to 0".to_string());
    }

    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (line, result) in reader.records().enumerate() {
        let line_no = line + 1;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                rejected.push(format!("row {line_no}: {e}"));
                continue;
            }
        };
        match parse_row(&record, &indices, dark1_index, dark2_index, seed_index, &scales) {
            Ok(row) => rows.push(row),
            Err(message) => rejected.push(format!("row {line_no}: {message}")),
        }
    }
    Ok(IngestOutcome { rows, warnings, rejected })
}

fn parse_row(
    record: &csv::StringRecord,
    required_indices: &[usize],
    dark1_index: Option<usize>,
    dark2_index: Option<usize>,
    seed_index: Option<usize>,
    scales: &UnitScales,
) -> Result<CsvRow, String> {
    let field = |i: usize| record.get(i).unwrap_or("").trim();
    let float = |i: usize, name: &str| -> Result<f64, String> {
        field(i).parse::<f64>().map_err(|e| format!("column {name}: {e}"))
    };
    let count = |i: Option<usize>, name: &str| -> Result<u64, String> {
        match i {
            None => Ok(0),
            Some(i) if field(i).is_empty() => Ok(0),
            Some(i) => field(i).parse::<u64>().map_err(|e| format!("column {name}: {e}")),
        }
    };

    let run_id = field(required_indices[0]).to_string();
    let arm = Arm::from_str(field(required_indices[1]))
        .map_err(|_| format!("column arm: expected \"sample\" or \"reference\", got \"{}\"", field(required_indices[1])))?;
    let delay_fs = float(required_indices[2], "delay_fs")? * scales.delay_to_fs;
    let pump_mw = float(required_indices[3], "pump_mw")? * scales.pump_to_mw;
    let concentration_molar =
        float(required_indices[4], "concentration_molar")? * scales.concentration_to_molar;
    let integration_s = float(required_indices[5], "integration_s")? * scales.time_to_s;
    let singles1 = count(Some(required_indices[6]), "singles1")?;
    let singles2 = count(Some(required_indices[7]), "singles2")?;
    let coincidences = count(Some(required_indices[8]), "coincidences")?;
    let dark1 = count(dark1_index, "dark1")?;
    let dark2 = count(dark2_index, "dark2")?;
    let seed = count(seed_index, "seed")?;

    if !(integration_s > 0.0) {
        return Err(format!("integration_s must be > 0, got {integration_s}"));
    }
    if concentration_molar < 0.0 {
        return Err(format!("concentration must be >= 0, got {concentration_molar}"));
    }
    if pump_mw < 0.0 {
        return Err(format!("pump power must be >= 0, got {pump_mw}"));
    }
    if coincidences > singles1.min(singles2) {
        return Err(format!(
            "coincidences {coincidences} exceed min(singles1, singles2) = {}",
            singles1.min(singles2)
        ));
    }

    Ok(CsvRow {
        run_id,
        arm,
        delay_fs,
        pump_mw,
        concentration_molar,
        integration_s,
        singles1,
        singles2,
        coincidences,
        dark1,
        dark2,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "run_id,arm,delay_fs,pump_mw,concentration_molar,integration_s,singles1,singles2,coincidences,dark1,dark2,seed";

    #[test]
    fn well_formed_rows_are_accepted() {
        let mut text = String::from(HEADER);
        for i in 0..10 {
            text.push_str(&format!("\nr{i},sample,0,1.0,0.001,60,1000,1000,100,5,5,0"));
        }
        let outcome = ingest_str(&text).unwrap();
        assert_eq!(outcome.rows.len(), 10);
        assert!(outcome.warnings.is_empty());
        assert!(outcome.rejected.is_empty());
    }

    #[test]
    fn pairing_violation_rejects_the_row_only() {
        let text = format!(
            "{HEADER}\nok,sample,0,1,0.001,60,1000,1000,100,0,0,0\nbad,sample,0,1,0.001,60,50,1000,100,0,0,0"
        );
        let outcome = ingest_str(&text).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        assert_eq!(outcome.rejected.len(), 1);
        assert!(outcome.rejected[0].contains("coincidences"), "{}", outcome.rejected[0]);
    }

    #[test]
    fn missing_dark_columns_default_with_warning() {
        let text = "run_id,arm,delay_fs,pump_mw,concentration_molar,integration_s,singles1,singles2,coincidences\nr0,reference,0,1,0,60,10,10,1";
        let outcome = ingest_str(text).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        assert_eq!(outcome.rows[0].dark1, 0);
        assert_eq!(outcome.warnings.len(), 1);
    }

    #[test]
    fn unknown_column_is_a_schema_error() {
        let text = format!("{HEADER},extra\nr0,sample,0,1,0,60,10,10,1,0,0,0,9");
        assert!(ingest_str(&text).is_err());
    }

    #[test]
    fn missing_required_column_is_a_schema_error() {
        let text = "run_id,arm,delay_fs,pump_mw,concentration_molar,integration_s,singles1,singles2\nr0,sample,0,1,0,60,10,10";
        let err = ingest_str(text).unwrap_err();
        assert!(err.to_string().contains("coincidences"), "{err}");
    }

    #[test]
    fn units_are_converted() {
        let text = format!(
            "# units: delay=ps pump=uW concentration=uM time=min\n{HEADER}\nr0,sample,0.333,500,17,1,1000,1000,100,0,0,0"
        );
        let outcome = ingest_str(&text).unwrap();
        let row = &outcome.rows[0];
        assert!((row.delay_fs - 333.0).abs() < 1e-9);
        assert!((row.pump_mw - 0.5).abs() < 1e-12);
        assert!((row.concentration_molar - 1.7e-5).abs() < 1e-18);
        assert!((row.integration_s - 60.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_unit_is_rejected() {
        let text = format!("# units: delay=widgets\n{HEADER}\n");
        assert!(ingest_str(&text).is_err());
    }
}
