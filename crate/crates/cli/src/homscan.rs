//! The `hom-fit` subcommand: fit the interference curve to a delay scan
//! taken from a canonical counts CSV and report visibility, width, and the
//! center-to-baseline bunching ratio.

use std::fs;
use std::path::Path;

use serde::Serialize;

use etpa_core::estimators::{fit_hom_curve, HomCurveParams, HomShape};

use crate::csvio::{write_series, CsvRow, SeriesPoint};
use crate::error::{CliError, CliResult};

#[derive(Debug)]
pub struct HomScanReport {
    pub params: HomCurveParams,
    pub n_points: usize,
}

/// Extract `(delay, coincidence rate, error)` points and fit. Every CSV row
/// is one scan point; at least 7 distinct delays are required.
pub fn fit_hom_scan(rows: &[CsvRow], shape: HomShape) -> CliResult<HomScanReport> {
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|row| {
            let t = row.integration_s;
            let rate = row.coincidences as f64 / t;
            // A zero-count point still carries one count's worth of
            // uncertainty; avoids infinite fit weights.
            let err = (row.coincidences.max(1) as f64).sqrt() / t;
            (row.delay_fs, rate, err)
        })
        .collect();
    let mut delays: Vec<u64> = points.iter().map(|p| p.0.to_bits()).collect();
    delays.sort_unstable();
    delays.dedup();
    if delays.len() < 7 {
        return Err(CliError::validation(format!(
            "a delay scan needs at least 7 distinct delays, got {}",
            delays.len()
        )));
    }
    let params = fit_hom_curve(&points, shape)?;
    Ok(HomScanReport { params, n_points: points.len() })
}

#[derive(Serialize)]
struct HomFitToml<'a> {
    shape: &'a str,
    a_hz: f64,
    b_fs: f64,
    c1_per_fs: f64,
    c2_fs: f64,
    d_hz: f64,
    visibility: f64,
    visibility_overshoot: bool,
    fwhm_fs: f64,
    center_to_baseline_ratio: f64,
    chi2: f64,
    dof: usize,
    n_points: usize,
}

/// Write `homfit.toml` (fit report) and `homfit_curve.csv` (data points and
/// a dense sampling of the fitted curve).
pub fn write_hom_report(
    out_dir: &Path,
    rows: &[CsvRow],
    shape: HomShape,
    report: &HomScanReport,
) -> CliResult<()> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("{}: {e}", out_dir.display())))?;
    let params = &report.params;
    let toml_report = HomFitToml {
        shape: match shape {
            HomShape::Dip => "dip",
            HomShape::Peak => "peak",
        },
        a_hz: params.a,
        b_fs: params.b,
        c1_per_fs: params.c1,
        c2_fs: params.c2,
        d_hz: params.d,
        visibility: params.visibility,
        visibility_overshoot: params.overshoot,
        fwhm_fs: params.fwhm_fs,
        center_to_baseline_ratio: params.center_to_baseline_ratio(),
        chi2: params.chi2,
        dof: params.dof,
        n_points: report.n_points,
    };
    let text = toml::to_string_pretty(&toml_report)
        .map_err(|e| CliError::io(format!("report serialization: {e}")))?;
    fs::write(out_dir.join("homfit.toml"), text)
        .map_err(|e| CliError::io(format!("homfit.toml: {e}")))?;

    let mut series: Vec<SeriesPoint> = rows
        .iter()
        .map(|row| {
            let t = row.integration_s;
            SeriesPoint {
                x: row.delay_fs,
                y: row.coincidences as f64 / t,
                yerr: (row.coincidences.max(1) as f64).sqrt() / t,
                series: "data".to_string(),
            }
        })
        .collect();
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.delay_fs), hi.max(r.delay_fs))
    });
    let n_samples = 400;
    for i in 0..=n_samples {
        let x = lo + (hi - lo) * i as f64 / n_samples as f64;
        series.push(SeriesPoint { x, y: params.evaluate(x), yerr: 0.0, series: "fit".to_string() });
    }
    write_series(&out_dir.join("homfit_curve.csv"), &series)
}
