//! The `analyze` subcommand: from a counts CSV to the three-method
//! cross-section table, signal-vs-flux plot series, absorption series, and
//! per-concentration sensitivity bounds.
//!
//! Records are grouped by `(arm, delay)`. Within each group the solvent
//! rows (concentration 0) are paired one-to-one, in file order, with the
//! rows of every nonzero concentration; each pair shares a sweep point.

use std::fs;
use std::path::Path;

use serde::Serialize;

use etpa_core::domain::{
    molecules_per_area, Arm, CrossSectionEstimate, DetectorParams, ExperimentConfig, RateTriple,
    SigmaMethod,
};
use etpa_core::estimators::{
    corrected_rates, etpa_signal_g2, etpa_signal_slopes, g2_zero, reference_correction,
    sensitivity_bound, sigma_from_g2, sigma_standard, weighted_linear_fit, weighted_mean,
    CorrectedRates, Uncertain,
};

use crate::csvio::{write_series, CsvRow, SeriesPoint};
use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Clone)]
pub struct AnalyzeOptions {
    /// Override the cuvette path length used in cross-section conversions;
    /// defaults to the config's `sample.path_length_cm`.
    pub path_length_cm: Option<f64>,
    /// Apply the reference-arm drift correction to sample-arm rates.
    pub ref_correct: bool,
}

/// One row of the cross-section report: the three estimators side by side.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub concentration_molar: f64,
    pub sigma_std_cc: CrossSectionEstimate,
    pub sigma_std_sc: CrossSectionEstimate,
    pub sigma_g2: CrossSectionEstimate,
}

/// Cross-section table for one `(arm, delay)` slice, one row per
/// concentration.
#[derive(Debug, Clone)]
pub struct ReportTable {
    pub arm: Arm,
    pub delay_fs: f64,
    pub rows: Vec<ReportRow>,
}

/// Scheme-comparison data for one `(arm, delay, concentration)` cell: the
/// pooled correlation signal, the slope-ratio signal, and the cross-section
/// the latter implies.
#[derive(Debug, Clone)]
pub struct SchemeSignalRow {
    pub arm: Arm,
    pub delay_fs: f64,
    pub concentration_molar: f64,
    pub g2_signal: Uncertain,
    pub slope_signal: Uncertain,
    pub sigma_slope_ratio: CrossSectionEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub arm: Arm,
    pub delay_fs: f64,
    pub concentration_molar: f64,
    pub solvent_rate_hz: f64,
    pub sigma_lb_cm2: f64,
}

#[derive(Debug)]
pub struct Analysis {
    pub tables: Vec<ReportTable>,
    pub scheme_signals: Vec<SchemeSignalRow>,
    pub signal_series: Vec<SeriesPoint>,
    pub absorption_series: Vec<SeriesPoint>,
    pub bounds: Vec<BoundRow>,
}

/// Dark- and accidental-corrected rates of one record, with the metadata
/// needed downstream.
struct PreparedRow {
    corrected: CorrectedRates,
}

fn prepare(rows: &[&CsvRow], detector: &DetectorParams) -> CliResult<Vec<PreparedRow>> {
    rows.iter()
        .map(|row| {
            let triple = RateTriple::from_counts(&row.record(), detector);
            let corrected = corrected_rates(&triple)
                .map_err(|e| CliError::validation(format!("run {}: {e}", row.run_id)))?;
            Ok(PreparedRow { corrected })
        })
        .collect()
}

/// Mean singles rate of the two detectors, the flux axis of every plot.
fn singles_mean(c: &CorrectedRates) -> Uncertain {
    Uncertain::new(
        (c.r1 + c.r2) / 2.0,
        (c.err1 * c.err1 + c.err2 * c.err2).sqrt() / 2.0,
    )
}

fn distinct_f64(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut seen: Vec<f64> = Vec::new();
    for v in values {
        if !seen.iter().any(|s| s.to_bits() == v.to_bits()) {
            seen.push(v);
        }
    }
    seen
}

pub fn analyze(
    rows: &[CsvRow],
    config: &ExperimentConfig,
    options: &AnalyzeOptions,
) -> CliResult<Analysis> {
    if rows.is_empty() {
        return Err(CliError::validation("counts file contains no rows"));
    }
    let path_length = options.path_length_cm.unwrap_or(config.sample.path_length_cm);
    if !(path_length > 0.0) {
        return Err(CliError::validation("path length must be > 0"));
    }
    let detector = &config.detector;

    if !rows.iter().any(|r| r.concentration_molar > 0.0) {
        return Err(CliError::validation(
            "no nonzero concentrations present; nothing to analyze",
        ));
    }

    let arms = {
        let mut arms: Vec<Arm> = Vec::new();
        for row in rows {
            if !arms.contains(&row.arm) {
                arms.push(row.arm);
            }
        }
        arms
    };
    let delays = distinct_f64(rows.iter().map(|r| r.delay_fs));

    let mut analysis = Analysis {
        tables: Vec::new(),
        scheme_signals: Vec::new(),
        signal_series: Vec::new(),
        absorption_series: Vec::new(),
        bounds: Vec::new(),
    };

    for &arm in &arms {
        for &delay in &delays {
            let group: Vec<&CsvRow> = rows
                .iter()
                .filter(|r| r.arm == arm && r.delay_fs.to_bits() == delay.to_bits())
                .collect();
            if group.is_empty() {
                continue;
            }
            let solvent_rows: Vec<&CsvRow> = group
                .iter()
                .copied()
                .filter(|r| r.concentration_molar == 0.0)
                .collect();
            if solvent_rows.is_empty() {
                return Err(CliError::validation(format!(
                    "missing solvent baseline for arm {arm}, delay {delay} fs"
                )));
            }
            let solvent = prepare(&solvent_rows, detector)?;
            let concentrations =
                distinct_f64(group.iter().map(|r| r.concentration_molar).filter(|c| *c > 0.0));

            let mut table = ReportTable { arm, delay_fs: delay, rows: Vec::new() };
            for &concentration in &concentrations {
                let sample_rows: Vec<&CsvRow> = group
                    .iter()
                    .copied()
                    .filter(|r| r.concentration_molar.to_bits() == concentration.to_bits())
                    .collect();
                if sample_rows.len() != solvent_rows.len() {
                    return Err(CliError::validation(format!(
                        "arm {arm}, delay {delay} fs, c = {concentration} M: {} sample rows vs {} solvent rows; series must align one-to-one",
                        sample_rows.len(),
                        solvent_rows.len()
                    )));
                }
                let mut sample = prepare(&sample_rows, detector)?;

                if options.ref_correct && arm == Arm::Sample {
                    sample = apply_reference_correction(
                        rows, detector, delay, concentration, sample,
                    )?;
                }

                let cell = analyze_cell(
                    &solvent,
                    &sample,
                    detector,
                    arm,
                    delay,
                    concentration,
                    path_length,
                    &mut analysis,
                )?;
                table.rows.push(cell);
            }
            if !table.rows.is_empty() {
                analysis.tables.push(table);
            }
        }
    }
    Ok(analysis)
}

/// Per-(arm, delay, concentration) estimates; also appends this cell's plot
/// series and bound.
#[allow(clippy::too_many_arguments)]
fn analyze_cell(
    solvent: &[PreparedRow],
    sample: &[PreparedRow],
    detector: &DetectorParams,
    arm: Arm,
    delay_fs: f64,
    concentration: f64,
    path_length: f64,
    analysis: &mut Analysis,
) -> CliResult<ReportRow> {
    let window_ns = detector.coincidence_window_ns;
    let label = format!("{arm} delay={delay_fs}fs c={concentration}M");

    let mut signals: Vec<Uncertain> = Vec::new();
    let mut cc_points: Vec<(f64, f64, f64)> = Vec::new();
    let mut sc_points: Vec<(f64, f64, f64)> = Vec::new();
    let mut slope_points: [Vec<(f64, f64, f64)>; 3] = Default::default();
    let mut solvent_flux = 0.0;

    for (solv, samp) in solvent.iter().zip(sample) {
        let s = &solv.corrected;
        let m = &samp.corrected;
        let flux = singles_mean(s);
        solvent_flux += flux.value;

        let g_solv = g2_zero(s, window_ns).map_err(CliError::from)?;
        let g_sam = g2_zero(m, window_ns).map_err(CliError::from)?;
        let signal = etpa_signal_g2(g_solv, g_sam).map_err(CliError::from)?;
        analysis.signal_series.push(SeriesPoint {
            x: flux.value,
            y: signal.value,
            yerr: signal.sigma,
            series: format!("{label} g2"),
        });
        signals.push(signal);

        let absorbed_cc = s.r12 - m.r12;
        let err_cc = (s.err12 * s.err12 + m.err12 * m.err12).sqrt();
        cc_points.push((s.r12, absorbed_cc, err_cc));
        analysis.absorption_series.push(SeriesPoint {
            x: s.r12,
            y: absorbed_cc,
            yerr: err_cc,
            series: format!("{label} cc"),
        });

        let solv_sc = flux;
        let samp_sc = singles_mean(m);
        let absorbed_sc = solv_sc.value - samp_sc.value;
        let err_sc = (solv_sc.sigma * solv_sc.sigma + samp_sc.sigma * samp_sc.sigma).sqrt();
        sc_points.push((solv_sc.value, absorbed_sc, err_sc));
        analysis.absorption_series.push(SeriesPoint {
            x: solv_sc.value,
            y: absorbed_sc,
            yerr: err_sc,
            series: format!("{label} sc"),
        });

        slope_points[0].push((s.r1, m.r1, m.err1));
        slope_points[1].push((s.r2, m.r2, m.err2));
        slope_points[2].push((s.r12, m.r12, m.err12));
    }
    solvent_flux /= solvent.len() as f64;

    let pooled_signal = weighted_mean(&signals).map_err(CliError::from)?;
    let sigma_g2 =
        sigma_from_g2(pooled_signal, concentration, path_length).map_err(CliError::from)?;

    let slope_cc = weighted_linear_fit(&cc_points).map_err(CliError::from)?.slope();
    let sigma_std_cc =
        sigma_standard(slope_cc, SigmaMethod::StandardCoincidence, concentration, path_length)
            .map_err(CliError::from)?;
    let slope_sc = weighted_linear_fit(&sc_points).map_err(CliError::from)?.slope();
    let sigma_std_sc =
        sigma_standard(slope_sc, SigmaMethod::StandardSingles, concentration, path_length)
            .map_err(CliError::from)?;

    let m1 = weighted_linear_fit(&slope_points[0]).map_err(CliError::from)?.slope();
    let m2 = weighted_linear_fit(&slope_points[1]).map_err(CliError::from)?.slope();
    let m12 = weighted_linear_fit(&slope_points[2]).map_err(CliError::from)?.slope();
    let slope_signal = etpa_signal_slopes(m1, m2, m12).map_err(CliError::from)?;
    let area_density =
        molecules_per_area(concentration, path_length).map_err(CliError::from)?;
    let sigma_slope_ratio = CrossSectionEstimate {
        value: slope_signal.value / area_density,
        abs_error: slope_signal.sigma / area_density,
        method: SigmaMethod::SlopeRatio,
        concentration_molar: concentration,
    };
    analysis.scheme_signals.push(SchemeSignalRow {
        arm,
        delay_fs,
        concentration_molar: concentration,
        g2_signal: pooled_signal,
        slope_signal,
        sigma_slope_ratio,
    });

    analysis.bounds.push(BoundRow {
        arm,
        delay_fs,
        concentration_molar: concentration,
        solvent_rate_hz: solvent_flux,
        sigma_lb_cm2: sensitivity_bound(solvent_flux, concentration, path_length)
            .map_err(CliError::from)?,
    });

    Ok(ReportRow { concentration_molar: concentration, sigma_std_cc, sigma_std_sc, sigma_g2 })
}

/// Reference-arm drift correction: scale the sample-arm corrected rates by
/// the mean quotient of the reference-arm signal between the solvent run
/// and this concentration's run.
fn apply_reference_correction(
    rows: &[CsvRow],
    detector: &DetectorParams,
    delay_fs: f64,
    concentration: f64,
    sample: Vec<PreparedRow>,
) -> CliResult<Vec<PreparedRow>> {
    let reference_rows = |c: f64| -> Vec<&CsvRow> {
        rows.iter()
            .filter(|r| {
                r.arm == Arm::Reference
                    && r.delay_fs.to_bits() == delay_fs.to_bits()
                    && r.concentration_molar.to_bits() == c.to_bits()
            })
            .collect()
    };
    let ref_solvent_rows = reference_rows(0.0);
    let ref_sample_rows = reference_rows(concentration);
    if ref_solvent_rows.is_empty() || ref_sample_rows.is_empty() {
        return Err(CliError::validation(format!(
            "reference correction requested but reference-arm rows are missing for delay {delay_fs} fs, c = {concentration} M"
        )));
    }
    let ref_solvent: Vec<CorrectedRates> =
        prepare(&ref_solvent_rows, detector)?.into_iter().map(|p| p.corrected).collect();
    let ref_sample: Vec<CorrectedRates> =
        prepare(&ref_sample_rows, detector)?.into_iter().map(|p| p.corrected).collect();
    let sample_rates: Vec<CorrectedRates> = sample.iter().map(|p| p.corrected).collect();
    let (_, corrected) = reference_correction(&sample_rates, &ref_solvent, &ref_sample)
        .map_err(CliError::from)?;
    Ok(corrected.into_iter().map(|c| PreparedRow { corrected: c }).collect())
}

#[derive(Serialize)]
struct ReportCsvRow {
    arm: Arm,
    delay_fs: f64,
    concentration_molar: f64,
    sigma_std_cc_cm2: f64,
    sigma_std_cc_err_cm2: f64,
    sigma_std_sc_cm2: f64,
    sigma_std_sc_err_cm2: f64,
    sigma_g2_cm2: f64,
    sigma_g2_err_cm2: f64,
    g2_zero_consistent: bool,
}

/// Write `report.csv`, `signals.csv`, `absorption.csv`, and `bounds.csv`.
pub fn write_analysis(out_dir: &Path, analysis: &Analysis) -> CliResult<()> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("{}: {e}", out_dir.display())))?;

    let report_path = out_dir.join("report.csv");
    let mut writer = csv::Writer::from_path(&report_path)
        .map_err(|e| CliError::io(format!("{}: {e}", report_path.display())))?;
    for table in &analysis.tables {
        for row in &table.rows {
            writer.serialize(ReportCsvRow {
                arm: table.arm,
                delay_fs: table.delay_fs,
                concentration_molar: row.concentration_molar,
                sigma_std_cc_cm2: row.sigma_std_cc.value,
                sigma_std_cc_err_cm2: row.sigma_std_cc.abs_error,
                sigma_std_sc_cm2: row.sigma_std_sc.value,
                sigma_std_sc_err_cm2: row.sigma_std_sc.abs_error,
                sigma_g2_cm2: row.sigma_g2.value,
                sigma_g2_err_cm2: row.sigma_g2.abs_error,
                g2_zero_consistent: row.sigma_g2.consistent_with_zero(),
            })?;
        }
    }
    writer.flush()?;

    write_series(&out_dir.join("signals.csv"), &analysis.signal_series)?;
    write_series(&out_dir.join("absorption.csv"), &analysis.absorption_series)?;

    let bounds_path = out_dir.join("bounds.csv");
    let mut writer = csv::Writer::from_path(&bounds_path)
        .map_err(|e| CliError::io(format!("{}: {e}", bounds_path.display())))?;
    for bound in &analysis.bounds {
        writer.serialize(bound)?;
    }
    writer.flush()?;
    Ok(())
}
