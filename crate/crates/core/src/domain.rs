//! Shared domain types, unit conventions, and configuration validation.
//!
//! Unit conventions used throughout the workspace:
//!
//! | quantity            | unit                                   |
//! |---------------------|----------------------------------------|
//! | pump power          | mW                                     |
//! | pair / count rates  | s⁻¹                                    |
//! | intra-pair delay τ  | fs                                     |
//! | correlation time Tₑ | ps                                     |
//! | concentration       | mol L⁻¹ (converted to mol cm⁻³ inside) |
//! | path length         | cm                                     |
//! | cross-section       | cm² molecule⁻¹                         |
//! | coincidence window  | ns                                     |
//! | integration time    | s                                      |
//!
//! All types here are immutable value objects and safe to share across
//! threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationReport};

/// Avogadro's number (CODATA exact value), mol⁻¹.
pub const AVOGADRO: f64 = 6.022_140_76e23;

/// Area density of molecules seen by a photon crossing the cuvette:
/// `(c / 1000) · N_A · ℓ` in cm⁻², with `c` in mol L⁻¹ and `ℓ` in cm.
///
/// The division by 1000 converts mol L⁻¹ to mol cm⁻³; the public API keeps
/// the molar unit because sample concentrations are quoted in mM and µM.
pub fn molecules_per_area(concentration_molar: f64, path_length_cm: f64) -> Result<f64> {
    if !(concentration_molar >= 0.0) {
        return Err(Error::invalid(
            "concentration_molar",
            format!("must be >= 0, got {concentration_molar}"),
        ));
    }
    if !(path_length_cm > 0.0) {
        return Err(Error::invalid(
            "path_length_cm",
            format!("must be > 0, got {path_length_cm}"),
        ));
    }
    Ok(concentration_molar / 1000.0 * AVOGADRO * path_length_cm)
}

/// Source geometry. The collinear setup has no delay stage, so a collinear
/// source must carry `delay_fs = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Collinear,
    Noncollinear,
}

/// Which photon-pair stream a measurement belongs to: through the cuvette
/// (`Sample`) or the equivalent control stream that never meets the sample
/// (`Reference`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Sample,
    Reference,
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arm::Sample => write!(f, "sample"),
            Arm::Reference => write!(f, "reference"),
        }
    }
}

impl std::str::FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(Arm::Sample),
            "reference" => Ok(Arm::Reference),
            other => Err(Error::invalid(
                "arm",
                format!("expected \"sample\" or \"reference\", got \"{other}\""),
            )),
        }
    }
}

/// SPDC source parameters, including the delay stage of the non-collinear
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    /// Pump power in mW.
    pub pump_power_mw: f64,
    /// Generated pairs per second per mW of pump.
    pub pairs_per_mw: f64,
    /// Interference visibility of the delay stage, in [0, 1].
    pub hom_visibility: f64,
    /// Pair correlation (entanglement) time Tₑ in ps.
    pub correlation_time_ps: f64,
    /// Signal-idler delay in fs. Must be 0 for a collinear source.
    pub delay_fs: f64,
    pub geometry: Geometry,
}

impl SourceParams {
    pub fn validate(&self, path: &str, report: &mut ValidationReport) {
        check_finite(self.pump_power_mw, path, "pump_power_mw", report);
        check_finite(self.pairs_per_mw, path, "pairs_per_mw", report);
        check_finite(self.hom_visibility, path, "hom_visibility", report);
        check_finite(self.correlation_time_ps, path, "correlation_time_ps", report);
        check_finite(self.delay_fs, path, "delay_fs", report);
        if self.pump_power_mw < 0.0 {
            report.push(format!("{path}.pump_power_mw"), "must be >= 0");
        }
        if self.pairs_per_mw < 0.0 {
            report.push(format!("{path}.pairs_per_mw"), "must be >= 0");
        }
        if !(self.correlation_time_ps > 0.0) {
            report.push(format!("{path}.correlation_time_ps"), "must be > 0");
        }
        if !(0.0..=1.0).contains(&self.hom_visibility) {
            report.push(
                format!("{path}.hom_visibility"),
                format!("must lie in [0, 1], got {}", self.hom_visibility),
            );
        }
        if self.geometry == Geometry::Collinear && self.delay_fs != 0.0 {
            report.push(
                format!("{path}.delay_fs"),
                "collinear geometry has no delay stage; delay_fs must be 0",
            );
        }
    }
}

/// The solution in the cuvette. `sigma_e_cm2` is the injected two-photon
/// cross-section; `alpha_per_molar_cm` is the one-photon Beer-Lambert
/// coefficient in absorbance units per (mol L⁻¹) cm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleParams {
    pub concentration_molar: f64,
    pub path_length_cm: f64,
    pub sigma_e_cm2: f64,
    pub alpha_per_molar_cm: f64,
    /// When set, every concentration-dependent term evaluates at c = 0.
    #[serde(default)]
    pub solvent_only: bool,
}

impl SampleParams {
    /// Concentration that actually enters the model.
    pub fn effective_concentration(&self) -> f64 {
        if self.solvent_only {
            0.0
        } else {
            self.concentration_molar
        }
    }

    pub fn validate(&self, path: &str, report: &mut ValidationReport) {
        check_finite(self.concentration_molar, path, "concentration_molar", report);
        check_finite(self.path_length_cm, path, "path_length_cm", report);
        check_finite(self.sigma_e_cm2, path, "sigma_e_cm2", report);
        check_finite(self.alpha_per_molar_cm, path, "alpha_per_molar_cm", report);
        if self.concentration_molar < 0.0 {
            report.push(format!("{path}.concentration_molar"), "must be >= 0");
        }
        if !(self.path_length_cm > 0.0) {
            report.push(format!("{path}.path_length_cm"), "must be > 0");
        }
        if self.sigma_e_cm2 < 0.0 {
            report.push(format!("{path}.sigma_e_cm2"), "must be >= 0");
        }
        if self.alpha_per_molar_cm < 0.0 {
            report.push(format!("{path}.alpha_per_molar_cm"), "must be >= 0");
        }
        // Pair-survival probability 1 - sigma * c * l * N_A must stay in [0, 1].
        if let Ok(area_density) =
            molecules_per_area(self.effective_concentration().max(0.0), self.path_length_cm.max(f64::MIN_POSITIVE))
        {
            let absorbed = self.sigma_e_cm2 * area_density;
            if absorbed > 1.0 {
                report.push(
                    format!("{path}.sigma_e_cm2"),
                    format!("pair survival < 0: sigma_e * c * l * N_A = {absorbed:.6e} exceeds 1"),
                );
            }
        }
    }
}

/// Transmission, fiber-coupling, and beamsplitter routing efficiencies of
/// the detection channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub eps1: f64,
    pub eps2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Probability that a pair delivers a photon to detector 1.
    pub beta1: f64,
    /// Probability that a pair delivers a photon to detector 2.
    pub beta2: f64,
    /// Probability that the pair splits, one photon to each detector.
    pub beta12: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            eps1: 1.0,
            eps2: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            beta1: 0.75,
            beta2: 0.75,
            beta12: 0.5,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self, path: &str, report: &mut ValidationReport) {
        for (name, value) in [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta12", self.beta12),
        ] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                report.push(
                    format!("{path}.{name}"),
                    format!("must lie in [0, 1], got {value}"),
                );
            }
        }
    }
}

/// Detector dark rates and the coincidence electronics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub dark_rate_1: f64,
    pub dark_rate_2: f64,
    pub coincidence_window_ns: f64,
    pub integration_time_s: f64,
}

impl DetectorParams {
    /// Coincidence window in seconds.
    pub fn window_s(&self) -> f64 {
        self.coincidence_window_ns * 1e-9
    }

    pub fn validate(&self, path: &str, report: &mut ValidationReport) {
        check_finite(self.dark_rate_1, path, "dark_rate_1", report);
        check_finite(self.dark_rate_2, path, "dark_rate_2", report);
        check_finite(self.coincidence_window_ns, path, "coincidence_window_ns", report);
        check_finite(self.integration_time_s, path, "integration_time_s", report);
        if self.dark_rate_1 < 0.0 {
            report.push(format!("{path}.dark_rate_1"), "must be >= 0");
        }
        if self.dark_rate_2 < 0.0 {
            report.push(format!("{path}.dark_rate_2"), "must be >= 0");
        }
        if !(self.coincidence_window_ns > 0.0) {
            report.push(format!("{path}.coincidence_window_ns"), "must be > 0");
        }
        if !(self.integration_time_s > 0.0) {
            report.push(format!("{path}.integration_time_s"), "must be > 0");
        }
    }
}

/// Sweep axes executed by the harness. The solvent point (concentration 0)
/// is prepended automatically when it is not listed, since every signal
/// ratio needs it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub pump_powers_mw: Vec<f64>,
    pub concentrations_molar: Vec<f64>,
    pub delays_fs: Vec<f64>,
    pub arms: Vec<Arm>,
    pub replicas: u32,
}

impl SweepSpec {
    /// Concentration list with the solvent baseline guaranteed present.
    pub fn concentrations_with_solvent(&self) -> Vec<f64> {
        let mut list = Vec::with_capacity(self.concentrations_molar.len() + 1);
        if !self.concentrations_molar.contains(&0.0) {
            list.push(0.0);
        }
        list.extend_from_slice(&self.concentrations_molar);
        list
    }

    pub fn validate(&self, path: &str, report: &mut ValidationReport) {
        if self.pump_powers_mw.is_empty() {
            report.push(format!("{path}.pump_powers_mw"), "must not be empty");
        }
        if self.concentrations_molar.is_empty() {
            report.push(format!("{path}.concentrations_molar"), "must not be empty");
        }
        if self.delays_fs.is_empty() {
            report.push(format!("{path}.delays_fs"), "must not be empty");
        }
        if self.arms.is_empty() {
            report.push(format!("{path}.arms"), "must not be empty");
        }
        if self.replicas == 0 {
            report.push(format!("{path}.replicas"), "must be >= 1");
        }
        for (i, p) in self.pump_powers_mw.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                report.push(format!("{path}.pump_powers_mw[{i}]"), format!("must be >= 0, got {p}"));
            }
        }
        for (i, c) in self.concentrations_molar.iter().enumerate() {
            if !c.is_finite() || *c < 0.0 {
                report.push(
                    format!("{path}.concentrations_molar[{i}]"),
                    format!("must be >= 0, got {c}"),
                );
            }
        }
        for (i, d) in self.delays_fs.iter().enumerate() {
            if !d.is_finite() {
                report.push(format!("{path}.delays_fs[{i}]"), "must be finite");
            }
        }
    }
}

/// Full parametric description of one simulated or ingested experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceParams,
    pub sample: SampleParams,
    pub channel: ChannelParams,
    pub detector: DetectorParams,
    pub sweep: SweepSpec,
    /// Relative spread of the multiplicative coupling perturbation drawn
    /// once per nonzero-concentration run in the sample arm, modelling a
    /// slightly disturbed cuvette between runs. 0 disables the effect.
    #[serde(default)]
    pub coupling_jitter: f64,
    /// Default base seed; the CLI `--seed` flag overrides it.
    #[serde(default)]
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        validate_config(self)
    }
}

/// Check every type invariant of the config, aggregating all violations
/// into one report instead of stopping at the first.
pub fn validate_config(config: &ExperimentConfig) -> Result<()> {
    let mut report = ValidationReport::default();
    config.source.validate("source", &mut report);
    config.sample.validate("sample", &mut report);
    config.channel.validate("channel", &mut report);
    config.detector.validate("detector", &mut report);
    config.sweep.validate("sweep", &mut report);
    if !config.coupling_jitter.is_finite() || config.coupling_jitter < 0.0 {
        report.push("coupling_jitter", "must be >= 0");
    }
    if config.source.geometry == Geometry::Collinear {
        for (i, d) in config.sweep.delays_fs.iter().enumerate() {
            if *d != 0.0 {
                report.push(
                    format!("sweep.delays_fs[{i}]"),
                    "collinear geometry has no delay stage; all sweep delays must be 0",
                );
            }
        }
    }
    // Sweep concentrations must keep the pair-survival probability physical
    // for the configured cross-section.
    if config.sample.path_length_cm > 0.0 {
        for (i, c) in config.sweep.concentrations_molar.iter().enumerate() {
            if *c >= 0.0 && c.is_finite() {
                if let Ok(area) = molecules_per_area(*c, config.sample.path_length_cm) {
                    if config.sample.sigma_e_cm2 * area > 1.0 {
                        report.push(
                            format!("sweep.concentrations_molar[{i}]"),
                            "pair survival < 0: sigma_e * c * l * N_A exceeds 1",
                        );
                    }
                }
            }
        }
    }
    report.into_result()
}

fn check_finite(value: f64, path: &str, name: &str, report: &mut ValidationReport) {
    if !value.is_finite() {
        report.push(format!("{path}.{name}"), format!("must be finite, got {value}"));
    }
}

/// Measured rates for one integration window: singles, coincidences, their
/// dark/accidental baselines, and one-sigma Poissonian uncertainties. All
/// entries are rates in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTriple {
    pub r1: f64,
    pub r2: f64,
    pub r12: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi12: f64,
    pub err1: f64,
    pub err2: f64,
    pub err12: f64,
}

impl RateTriple {
    /// Build a rate triple from raw counts. The accidental-coincidence
    /// baseline is computed as `tau_c * r1 * r2` from the raw singles rates;
    /// use [`RateTriple::from_counts_with_baseline`] when a measured
    /// accidental rate is available instead.
    pub fn from_counts(record: &CountRecord, detector: &DetectorParams) -> RateTriple {
        let t = record.integration_s;
        let r1 = record.singles1 as f64 / t;
        let r2 = record.singles2 as f64 / t;
        let phi12 = detector.window_s() * r1 * r2;
        Self::from_counts_with_baseline(record, phi12)
    }

    /// As [`RateTriple::from_counts`] but with a caller-supplied accidental
    /// baseline (e.g. a measured delayed-window rate).
    pub fn from_counts_with_baseline(record: &CountRecord, phi12: f64) -> RateTriple {
        let t = record.integration_s;
        RateTriple {
            r1: record.singles1 as f64 / t,
            r2: record.singles2 as f64 / t,
            r12: record.coincidences as f64 / t,
            phi1: record.dark1 as f64 / t,
            phi2: record.dark2 as f64 / t,
            phi12,
            err1: (record.singles1 as f64).sqrt() / t,
            err2: (record.singles2 as f64).sqrt() / t,
            err12: (record.coincidences as f64).sqrt() / t,
        }
    }
}

/// One integration-window measurement with its sweep metadata. Counts are
/// raw nonnegative integers; `dark1`/`dark2` hold the concurrently recorded
/// dark-count calibration for each detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
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

impl CountRecord {
    /// Validate the count invariants; `coincidences` can never exceed either
    /// singles stream because every matched coincidence consumes one click
    /// from each.
    pub fn validate(&self) -> Result<()> {
        if self.coincidences > self.singles1.min(self.singles2) {
            return Err(Error::invalid(
                "coincidences",
                format!(
                    "{} exceeds min(singles1, singles2) = {}",
                    self.coincidences,
                    self.singles1.min(self.singles2)
                ),
            ));
        }
        Ok(())
    }
}

/// Estimation scheme behind a cross-section value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    StandardSingles,
    StandardCoincidence,
    G2,
    SlopeRatio,
}

impl std::fmt::Display for SigmaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SigmaMethod::StandardSingles => "standard_singles",
            SigmaMethod::StandardCoincidence => "standard_coincidence",
            SigmaMethod::G2 => "g2",
            SigmaMethod::SlopeRatio => "slope_ratio",
        };
        write!(f, "{s}")
    }
}

/// A cross-section estimate in cm² molecule⁻¹ with its one-sigma absolute
/// error. Negative values are retained rather than clamped; measured signals
/// fluctuate around zero when no absorber acts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionEstimate {
    pub value: f64,
    pub abs_error: f64,
    pub method: SigmaMethod,
    pub concentration_molar: f64,
}

impl CrossSectionEstimate {
    /// True when the estimate cannot be distinguished from zero at one
    /// sigma, i.e. `|value| < abs_error`.
    pub fn consistent_with_zero(&self) -> bool {
        self.within_n_sigma_of_zero(1.0)
    }

    /// `|value| < k * abs_error`.
    pub fn within_n_sigma_of_zero(&self, k: f64) -> bool {
        self.value.abs() < k * self.abs_error
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_config() -> ExperimentConfig {
        ExperimentConfig {
            source: SourceParams {
                pump_power_mw: 1.0,
                pairs_per_mw: 1.0e5,
                hom_visibility: 0.957,
                correlation_time_ps: 0.20,
                delay_fs: 0.0,
                geometry: Geometry::Noncollinear,
            },
            sample: SampleParams {
                concentration_molar: 5.0e-6,
                path_length_cm: 1.0,
                sigma_e_cm2: 0.0,
                alpha_per_molar_cm: 0.0,
                solvent_only: false,
            },
            channel: ChannelParams::default(),
            detector: DetectorParams {
                dark_rate_1: 200.0,
                dark_rate_2: 200.0,
                coincidence_window_ns: 1.05,
                integration_time_s: 60.0,
            },
            sweep: SweepSpec {
                pump_powers_mw: vec![0.5, 1.0],
                concentrations_molar: vec![0.0, 5.0e-6],
                delays_fs: vec![0.0],
                arms: vec![Arm::Sample, Arm::Reference],
                replicas: 1,
            },
            coupling_jitter: 0.0,
            base_seed: 0,
        }
    }

    #[test]
    fn molecules_per_area_zero_concentration() {
        assert_eq!(molecules_per_area(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn molecules_per_area_hand_values() {
        // 58 mM over 1 cm: 5.8e-5 mol cm^-3 * N_A.
        let got = molecules_per_area(0.058, 1.0).unwrap();
        assert!((got - 3.492_841_64e19).abs() / 3.492_841_64e19 < 1e-8, "got {got}");
        // 10 uM over 1 cm: 1e-8 mol cm^-3 * N_A.
        let got = molecules_per_area(10e-6, 1.0).unwrap();
        assert!((got - 6.022_140_76e15).abs() / 6.022_140_76e15 < 1e-12, "got {got}");
    }

    #[test]
    fn molecules_per_area_rejects_negative() {
        assert!(molecules_per_area(-1.0, 1.0).is_err());
        assert!(molecules_per_area(0.1, 0.0).is_err());
        assert!(molecules_per_area(0.1, -2.0).is_err());
    }

    #[test]
    fn molecules_per_area_is_linear() {
        let base = molecules_per_area(0.004, 2.0).unwrap();
        assert_eq!(molecules_per_area(0.008, 2.0).unwrap(), 2.0 * base);
        assert_eq!(molecules_per_area(0.004, 4.0).unwrap(), 2.0 * base);
    }

    #[test]
    fn default_config_is_valid() {
        validate_config(&default_config()).unwrap();
        assert_eq!(default_config().channel.beta12, 0.5);
        assert_eq!(default_config().channel.beta1, 0.75);
    }

    #[test]
    fn visibility_out_of_range_is_reported_with_field_path() {
        let mut config = default_config();
        config.source.hom_visibility = 1.2;
        let err = validate_config(&config).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("source.hom_visibility"), "{text}");
    }

    #[test]
    fn oversized_cross_section_is_reported() {
        let mut config = default_config();
        // sigma * c * l * N_A = 1.5 for c = 58 mM.
        config.sample.concentration_molar = 0.058;
        config.sample.sigma_e_cm2 = 1.5 / 3.492_841_64e19;
        config.sweep.concentrations_molar = vec![0.0, 0.058];
        let err = validate_config(&config).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("pair survival < 0"), "{text}");
    }

    #[test]
    fn validation_aggregates_multiple_issues() {
        let mut config = default_config();
        config.source.hom_visibility = -0.5;
        config.detector.integration_time_s = 0.0;
        config.sweep.replicas = 0;
        match validate_config(&config).unwrap_err() {
            Error::Validation(report) => assert!(report.issues.len() >= 3, "{report}"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn collinear_delay_must_be_zero() {
        let mut config = default_config();
        config.source.geometry = Geometry::Collinear;
        config.source.delay_fs = 100.0;
        assert!(validate_config(&config).is_err());
        config.source.delay_fs = 0.0;
        validate_config(&config).unwrap();
    }

    #[test]
    fn solvent_baseline_is_prepended_when_missing() {
        let mut sweep = default_config().sweep;
        sweep.concentrations_molar = vec![1.0e-3];
        assert_eq!(sweep.concentrations_with_solvent(), vec![0.0, 1.0e-3]);
        sweep.concentrations_molar = vec![0.0, 1.0e-3];
        assert_eq!(sweep.concentrations_with_solvent(), vec![0.0, 1.0e-3]);
    }

    #[test]
    fn rate_triple_from_counts_accidental_pathways() {
        let detector = DetectorParams {
            dark_rate_1: 200.0,
            dark_rate_2: 200.0,
            coincidence_window_ns: 1.05,
            integration_time_s: 60.0,
        };
        let record = CountRecord {
            arm: Arm::Sample,
            delay_fs: 0.0,
            pump_mw: 1.0,
            concentration_molar: 0.0,
            integration_s: 60.0,
            singles1: 1_812_000,
            singles2: 1_812_000,
            coincidences: 480_000,
            dark1: 12_000,
            dark2: 12_000,
            seed: 0,
        };
        // Computed pathway: phi12 = tau_c * r1 * r2 from the raw rates.
        let triple = RateTriple::from_counts(&record, &detector);
        assert!((triple.r1 - 30_200.0).abs() < 1e-9);
        assert!((triple.phi1 - 200.0).abs() < 1e-12);
        assert!((triple.phi12 - 1.05e-9 * 30_200.0 * 30_200.0).abs() < 1e-9);
        assert!((triple.err1 - (1_812_000.0_f64).sqrt() / 60.0).abs() < 1e-12);
        // Measured pathway: a supplied delayed-window baseline wins.
        let measured = RateTriple::from_counts_with_baseline(&record, 1.25);
        assert_eq!(measured.phi12, 1.25);
    }

    #[test]
    fn count_record_invariant() {
        let record = CountRecord {
            arm: Arm::Sample,
            delay_fs: 0.0,
            pump_mw: 1.0,
            concentration_molar: 0.0,
            integration_s: 1.0,
            singles1: 10,
            singles2: 8,
            coincidences: 9,
            dark1: 0,
            dark2: 0,
            seed: 0,
        };
        assert!(record.validate().is_err());
    }

    #[test]
    fn estimate_zero_consistency_flag() {
        let est = CrossSectionEstimate {
            value: -0.5e-21,
            abs_error: 0.8e-21,
            method: SigmaMethod::G2,
            concentration_molar: 0.058,
        };
        assert!(est.consistent_with_zero());
        assert!(!CrossSectionEstimate { value: 2.0e-21, ..est }.consistent_with_zero());
    }
}
