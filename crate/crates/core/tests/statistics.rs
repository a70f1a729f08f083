//! Statistical checks of the samplers and the error propagation against
//! their analytic expectations, with fixed seeds.

use etpa_core::domain::{
    molecules_per_area, Arm, ChannelParams, CountRecord, DetectorParams, ExperimentConfig,
    Geometry, RateTriple, SampleParams, SigmaMethod, SourceParams, SweepSpec,
};
use etpa_core::estimators::{
    corrected_rates, etpa_signal_g2, g2_zero, sensitivity_bound, sigma_from_g2, weighted_mean,
    Uncertain,
};
use etpa_core::forward::{detected_rates, pair_rate_at_cuvette, SurvivalFactors};
use etpa_core::montecarlo::{simulate_event_level, simulate_rate_level, SimulationMode, SimulationPlan};

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        source: SourceParams {
            pump_power_mw: 1.0,
            pairs_per_mw: 1.0e5,
            hom_visibility: 0.957,
            correlation_time_ps: 0.2,
            delay_fs: 0.0,
            geometry: Geometry::Collinear,
        },
        sample: SampleParams {
            concentration_molar: 0.0,
            path_length_cm: 1.0,
            sigma_e_cm2: 0.0,
            alpha_per_molar_cm: 0.0,
            solvent_only: false,
        },
        channel: ChannelParams {
            eps1: 0.5,
            eps2: 0.5,
            kappa1: 0.8,
            kappa2: 0.8,
            ..ChannelParams::default()
        },
        detector: DetectorParams {
            dark_rate_1: 200.0,
            dark_rate_2: 200.0,
            coincidence_window_ns: 1.05,
            integration_time_s: 60.0,
        },
        sweep: SweepSpec {
            pump_powers_mw: vec![1.0],
            concentrations_molar: vec![0.0],
            delays_fs: vec![0.0],
            arms: vec![Arm::Sample],
            replicas: 1,
        },
        coupling_jitter: 0.0,
        base_seed: 2024,
    }
}

/// Sample mean and standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn rate_level_counts_follow_poisson_statistics() {
    // r1 = 30200 / s over 60 s: lambda = 1_812_000, sigma = 1346.1.
    let mut config = base_config();
    config.sweep.replicas = 10_000;
    let plan = SimulationPlan::new(config, SimulationMode::Rate);
    let records = simulate_rate_level(&plan).unwrap();
    assert_eq!(records.len(), 10_000);
    let singles: Vec<f64> = records.iter().map(|r| r.singles1 as f64).collect();
    let (mean, std) = mean_std(&singles);
    let lambda: f64 = 30_200.0 * 60.0;
    let sigma_of_mean = lambda.sqrt() / (10_000.0_f64).sqrt();
    assert!(
        (mean - lambda).abs() < 5.0 * sigma_of_mean,
        "mean {mean} vs {lambda} (5 sigma = {})",
        5.0 * sigma_of_mean
    );
    assert!((std / lambda.sqrt() - 1.0).abs() < 0.05, "std {std} vs {}", lambda.sqrt());
}

/// Event-level mean rates must match the analytic rate triple within five
/// standard errors, accidentals included.
#[test]
fn event_level_oracle_matches_analytic_rates() {
    let mut config = base_config();
    config.detector.integration_time_s = 5.0;
    config.sweep.replicas = 100;
    let plan = SimulationPlan::new(config.clone(), SimulationMode::Event);
    let records = simulate_event_level(&plan).unwrap();
    assert_eq!(records.len(), 100);

    let expected = detected_rates(
        pair_rate_at_cuvette(&config.source),
        &SurvivalFactors::PASSTHROUGH,
        &config.channel,
        &config.detector,
    );
    let t = config.detector.integration_time_s;
    let m = records.len() as f64;
    for (label, observed, rate) in [
        ("singles1", records.iter().map(|r| r.singles1).sum::<u64>(), expected.r1),
        ("singles2", records.iter().map(|r| r.singles2).sum::<u64>(), expected.r2),
        ("coincidences", records.iter().map(|r| r.coincidences).sum::<u64>(), expected.r12),
    ] {
        let mean_rate = observed as f64 / (m * t);
        let standard_error = (rate / (t * m)).sqrt();
        let z = (mean_rate - rate).abs() / standard_error;
        assert!(z < 5.0, "{label}: mean {mean_rate} vs {rate}, z = {z:.2}");
    }
}

/// Shrinking the window with darks off removes accidentals; the coincidence
/// rate converges to the true pair-detection rate.
#[test]
fn tiny_window_leaves_only_true_coincidences() {
    let mut config = base_config();
    config.detector.dark_rate_1 = 0.0;
    config.detector.dark_rate_2 = 0.0;
    config.detector.coincidence_window_ns = 1e-4;
    config.detector.integration_time_s = 5.0;
    config.sweep.replicas = 100;
    let plan = SimulationPlan::new(config.clone(), SimulationMode::Event);
    let records = simulate_event_level(&plan).unwrap();
    let t = config.detector.integration_time_s;
    let m = records.len() as f64;
    let mean_rate = records.iter().map(|r| r.coincidences).sum::<u64>() as f64 / (m * t);
    // eta^2 eps1 eps2 kappa1 kappa2 beta12 R = 0.25 * 0.64 * 0.5 * 1e5.
    let truth = 8000.0;
    let standard_error = (truth / (t * m)).sqrt();
    assert!(
        (mean_rate - truth).abs() < 5.0 * standard_error,
        "mean {mean_rate} vs {truth}"
    );
}

/// Total pair absorption leaves only dark-count accidentals.
#[test]
fn full_absorption_leaves_accidentals_only() {
    let mut config = base_config();
    // sigma * c * l * N_A = 1: every pair is absorbed at zero delay.
    config.sample.concentration_molar = 0.058;
    config.sample.sigma_e_cm2 = 1.0 / molecules_per_area(0.058, 1.0).unwrap();
    config.sweep.concentrations_molar = vec![0.058];
    config.detector.dark_rate_1 = 2000.0;
    config.detector.dark_rate_2 = 2000.0;
    config.detector.integration_time_s = 5.0;
    config.sweep.replicas = 200;
    let plan = SimulationPlan::new(config.clone(), SimulationMode::Event);
    let records = simulate_event_level(&plan).unwrap();
    let sample_records: Vec<&CountRecord> =
        records.iter().filter(|r| r.concentration_molar > 0.0).collect();
    assert!(!sample_records.is_empty());
    let t = config.detector.integration_time_s;
    let m = sample_records.len() as f64;
    let mean_rate =
        sample_records.iter().map(|r| r.coincidences).sum::<u64>() as f64 / (m * t);
    let accidental = config.detector.window_s() * 2000.0 * 2000.0;
    let standard_error = (accidental / (t * m)).sqrt();
    assert!(
        (mean_rate - accidental).abs() < 5.0 * standard_error,
        "mean {mean_rate} vs accidental level {accidental}"
    );
    // No pair made it through.
    let singles_rate = sample_records.iter().map(|r| r.singles1).sum::<u64>() as f64 / (m * t);
    let singles_se = (2000.0_f64 / (t * m)).sqrt();
    assert!((singles_rate - 2000.0).abs() < 5.0 * singles_se);
}

/// First-order g2 error propagation against the spread of 10^4 Poisson
/// replicas: the predicted sigma must match the sample spread within 10%.
#[test]
fn g2_error_prediction_matches_monte_carlo_spread() {
    let mut config = base_config();
    config.sweep.replicas = 10_000;
    let plan = SimulationPlan::new(config.clone(), SimulationMode::Rate);
    let records = simulate_rate_level(&plan).unwrap();
    let mut values = Vec::new();
    let mut predicted = Vec::new();
    for record in &records {
        let triple = RateTriple::from_counts(record, &config.detector);
        let corrected = corrected_rates(&triple).unwrap();
        let g2 = g2_zero(&corrected, config.detector.coincidence_window_ns).unwrap();
        values.push(g2.value);
        predicted.push(g2.sigma);
    }
    let (_, spread) = mean_std(&values);
    let mean_predicted = predicted.iter().sum::<f64>() / predicted.len() as f64;
    assert!(
        (mean_predicted / spread - 1.0).abs() < 0.10,
        "predicted {mean_predicted} vs observed spread {spread}"
    );
}

/// Helper: mean g2 signal and pooled estimate over paired solvent/sample
/// replica records.
fn g2_signal_series(
    solvent: &[CountRecord],
    sample: &[CountRecord],
    detector: &DetectorParams,
) -> Vec<Uncertain> {
    solvent
        .iter()
        .zip(sample)
        .map(|(s, m)| {
            let g_solv = g2_zero(
                &corrected_rates(&RateTriple::from_counts(s, detector)).unwrap(),
                detector.coincidence_window_ns,
            )
            .unwrap();
            let g_sam = g2_zero(
                &corrected_rates(&RateTriple::from_counts(m, detector)).unwrap(),
                detector.coincidence_window_ns,
            )
            .unwrap();
            etpa_signal_g2(g_solv, g_sam).unwrap()
        })
        .collect()
}

/// The correlation-based estimator is consistent: over 100 replicas the
/// pooled cross-section recovers an injected value above the sensitivity
/// bound within two standard errors, and stays consistent with zero for an
/// injection far below the bound.
#[test]
fn sigma_g2_estimator_is_consistent() {
    let concentration = 1.0e-3;
    let mut config = base_config();
    config.sweep.concentrations_molar = vec![0.0, concentration];
    config.sweep.replicas = 100;

    // The solvent singles rate sets the bound.
    let solvent_rates = detected_rates(
        1.0e5,
        &SurvivalFactors::PASSTHROUGH,
        &config.channel,
        &config.detector,
    );
    let bound = sensitivity_bound(solvent_rates.r1 - 200.0, concentration, 1.0).unwrap();

    for (label, injected, expect_recovery) in
        [("above bound", 5.0 * bound, true), ("below bound", bound / 50.0, false)]
    {
        let mut cfg = config.clone();
        cfg.sample.concentration_molar = concentration;
        cfg.sample.sigma_e_cm2 = injected;
        cfg.base_seed = 77;
        let records = simulate_rate_level(&SimulationPlan::new(cfg.clone(), SimulationMode::Rate))
            .unwrap();
        let solvent: Vec<CountRecord> =
            records.iter().filter(|r| r.concentration_molar == 0.0).cloned().collect();
        let sample: Vec<CountRecord> =
            records.iter().filter(|r| r.concentration_molar > 0.0).cloned().collect();
        assert_eq!(solvent.len(), 100);
        assert_eq!(sample.len(), 100);
        let signals = g2_signal_series(&solvent, &sample, &cfg.detector);
        let pooled = weighted_mean(&signals).unwrap();
        let estimate = sigma_from_g2(pooled, concentration, 1.0).unwrap();
        assert_eq!(estimate.method, SigmaMethod::G2);
        let z = (estimate.value - injected).abs() / estimate.abs_error;
        assert!(z < 2.0, "{label}: estimate {} vs injected {injected}, z = {z:.2}", estimate.value);
        if expect_recovery {
            assert!(
                !estimate.within_n_sigma_of_zero(2.0),
                "{label}: estimate should be significant"
            );
        } else {
            assert!(
                estimate.within_n_sigma_of_zero(2.0),
                "{label}: estimate {} +- {} should be consistent with zero",
                estimate.value,
                estimate.abs_error
            );
        }
    }
}
