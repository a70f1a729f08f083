//! Stochastic count generation.
//!
//! Two samplers share one sweep enumeration and one seeding scheme:
//!
//! * [`simulate_rate_level`] draws each recorded count directly from a
//!   Poisson law over the analytic rates — fast, and exact whenever the
//!   analytic model is.
//! * [`simulate_event_level`] walks every generated pair through absorption,
//!   routing, and per-photon loss, stamps clicks on a timeline, and counts
//!   coincidences by window matching. It is the brute-force oracle for the
//!   analytic rate formulas.
//!
//! Seeding is counter-based: record `i` (sweep points outermost, replicas
//! innermost) derives its own stream seed from `base_seed` via a splitmix64
//! jump, so records are independent and reproducible regardless of
//! execution order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::domain::{
    validate_config, Arm, ChannelParams, CountRecord, ExperimentConfig, SampleParams, SourceParams,
};
use crate::error::{Error, Result};
use crate::forward::{self, SurvivalFactors};

/// Guard on the expected pair count per event-level record.
pub const MAX_EVENT_PAIRS: f64 = 1.0e8;

/// Seed-stream offset reserved for the per-run coupling perturbation, far
/// above any realistic record index.
const JITTER_STREAM: u64 = 1 << 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationMode {
    #[serde(alias = "rate_level")]
    Rate,
    #[serde(alias = "event_level")]
    Event,
}

/// One simulation request: the experiment, the sampling mode, how many
/// replicas of every sweep point, and the base seed all record streams
/// derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub config: ExperimentConfig,
    pub mode: SimulationMode,
    pub replicas: u32,
    pub base_seed: u64,
}

impl SimulationPlan {
    pub fn new(config: ExperimentConfig, mode: SimulationMode) -> SimulationPlan {
        let replicas = config.sweep.replicas.max(1);
        let base_seed = config.base_seed;
        SimulationPlan { config, mode, replicas, base_seed }
    }

    pub fn validate(&self) -> Result<()> {
        validate_config(&self.config)?;
        if self.replicas == 0 {
            return Err(Error::invalid("plan.replicas", "must be >= 1"));
        }
        Ok(())
    }
}

/// One expanded sweep coordinate (without the replica axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub arm: Arm,
    pub delay_fs: f64,
    pub concentration_molar: f64,
    /// Index into the solvent-extended concentration list; identifies the
    /// "run" for the coupling perturbation.
    pub concentration_index: usize,
    pub pump_mw: f64,
}

/// Expand the sweep axes in canonical order: arm, delay, concentration,
/// pump power. The solvent concentration is included automatically.
pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let concentrations = config.sweep.concentrations_with_solvent();
    let mut points = Vec::new();
    for &arm in &config.sweep.arms {
        for &delay_fs in &config.sweep.delays_fs {
            for (concentration_index, &concentration_molar) in concentrations.iter().enumerate() {
                for &pump_mw in &config.sweep.pump_powers_mw {
                    points.push(SweepPoint {
                        arm,
                        delay_fs,
                        concentration_molar,
                        concentration_index,
                        pump_mw,
                    });
                }
            }
        }
    }
    points
}

/// Deterministic per-record seed: a splitmix64 jump from `base` at `index`.
pub fn split_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn record_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn poisson_draw<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("finite positive lambda").sample(rng) as u64
}

/// Multiplicative coupling perturbation for one concentration run in the
/// sample arm: `exp(jitter * z)` with a standard normal `z`, drawn from a
/// seed stream disjoint from all record streams. The solvent run is the
/// unperturbed baseline.
fn coupling_factor(base_seed: u64, jitter: f64, concentration_index: usize) -> f64 {
    if jitter <= 0.0 || concentration_index == 0 {
        return 1.0;
    }
    let mut rng = record_rng(split_seed(base_seed, JITTER_STREAM + concentration_index as u64));
    let z: f64 = StandardNormal.sample(&mut rng);
    (jitter * z).exp()
}

/// Channel parameters seen by one record, with the coupling perturbation
/// applied in the sample arm for nonzero concentrations.
fn channel_for_point(config: &ExperimentConfig, base_seed: u64, point: &SweepPoint) -> ChannelParams {
    let mut channel = config.channel.clone();
    if point.arm == Arm::Sample && point.concentration_molar > 0.0 {
        let factor = coupling_factor(base_seed, config.coupling_jitter, point.concentration_index);
        channel.kappa1 = (channel.kappa1 * factor).min(1.0);
        channel.kappa2 = (channel.kappa2 * factor).min(1.0);
    }
    channel
}

fn source_for_point(config: &ExperimentConfig, point: &SweepPoint) -> SourceParams {
    SourceParams {
        pump_power_mw: point.pump_mw,
        delay_fs: point.delay_fs,
        ..config.source.clone()
    }
}

fn sample_for_point(config: &ExperimentConfig, point: &SweepPoint) -> SampleParams {
    SampleParams {
        concentration_molar: point.concentration_molar,
        ..config.sample.clone()
    }
}

/// Survival factors for one record: the reference arm never meets the
/// sample, and the solvent run evaluates at concentration zero.
fn survival_for_point(config: &ExperimentConfig, point: &SweepPoint) -> Result<SurvivalFactors> {
    match point.arm {
        Arm::Reference => Ok(SurvivalFactors::PASSTHROUGH),
        Arm::Sample => {
            let sample = sample_for_point(config, point);
            SurvivalFactors::for_sample(&sample, point.delay_fs, config.source.correlation_time_ps)
        }
    }
}

/// Dispatch on the plan's sampling mode.
pub fn simulate(plan: &SimulationPlan) -> Result<Vec<CountRecord>> {
    match plan.mode {
        SimulationMode::Rate => simulate_rate_level(plan),
        SimulationMode::Event => simulate_event_level(plan),
    }
}

/// Poisson sampling of the analytic rates: for every sweep point and
/// replica, counts are drawn as `Poisson(rate * T)` in the fixed order
/// singles1, singles2, coincidences, dark1, dark2.
pub fn simulate_rate_level(plan: &SimulationPlan) -> Result<Vec<CountRecord>> {
    plan.validate()?;
    let config = &plan.config;
    let t = config.detector.integration_time_s;
    let mut records = Vec::new();
    let mut index: u64 = 0;
    for point in sweep_points(config) {
        let source = source_for_point(config, &point);
        let channel = channel_for_point(config, plan.base_seed, &point);
        let survival = survival_for_point(config, &point)?;
        let pair_rate = forward::pair_rate_at_cuvette(&source);
        let rates = forward::detected_rates(pair_rate, &survival, &channel, &config.detector);
        for _ in 0..plan.replicas {
            let seed = split_seed(plan.base_seed, index);
            index += 1;
            let mut rng = record_rng(seed);
            let singles1 = poisson_draw(&mut rng, rates.r1 * t);
            let singles2 = poisson_draw(&mut rng, rates.r2 * t);
            // Independent draws can, in principle, break the pairing bound;
            // clamp to keep every emitted record physical.
            let coincidences =
                poisson_draw(&mut rng, rates.r12 * t).min(singles1).min(singles2);
            let dark1 = poisson_draw(&mut rng, config.detector.dark_rate_1 * t);
            let dark2 = poisson_draw(&mut rng, config.detector.dark_rate_2 * t);
            records.push(CountRecord {
                arm: point.arm,
                delay_fs: point.delay_fs,
                pump_mw: point.pump_mw,
                concentration_molar: point.concentration_molar,
                integration_s: t,
                singles1,
                singles2,
                coincidences,
                dark1,
                dark2,
                seed,
            });
        }
    }
    Ok(records)
}

/// Event-level pair walk, the brute-force oracle for the analytic rates.
///
/// For every pair: absorb it with probability `1 - eps_etpa`; otherwise
/// stamp a timestamp uniform in `[0, T)` and route it at the beamsplitter
/// (`split` with probability `beta12`, both photons to detector 1 or 2 with
/// probabilities `beta1 - beta12` and `beta2 - beta12`). A split pair tests
/// each photon independently against its per-photon survival; a bunched
/// pair occupies one temporal mode and yields at most one click, tested
/// once. Dark counts join each detector stream as independent Poisson
/// timestamp processes, and coincidences are counted by greedy
/// earliest-first matching with single-use clicks inside a window of full
/// width `tau_c`.
pub fn simulate_event_level(plan: &SimulationPlan) -> Result<Vec<CountRecord>> {
    plan.validate()?;
    let config = &plan.config;
    let channel_probabilities_ok = config.channel.beta1 >= config.channel.beta12
        && config.channel.beta2 >= config.channel.beta12
        && config.channel.beta1 + config.channel.beta2 - config.channel.beta12 <= 1.0 + 1e-12;
    if !channel_probabilities_ok {
        return Err(Error::invalid(
            "channel",
            "event-level routing needs beta1 >= beta12, beta2 >= beta12, beta1 + beta2 - beta12 <= 1",
        ));
    }
    let t = config.detector.integration_time_s;
    let window_s = config.detector.window_s();
    let mut records = Vec::new();
    let mut index: u64 = 0;
    for point in sweep_points(config) {
        let source = source_for_point(config, &point);
        let channel = channel_for_point(config, plan.base_seed, &point);
        let survival = survival_for_point(config, &point)?;
        let pair_rate = forward::pair_rate_at_cuvette(&source);
        let expected_pairs = pair_rate * t;
        if expected_pairs > MAX_EVENT_PAIRS {
            return Err(Error::TractabilityExceeded { pairs: expected_pairs, limit: MAX_EVENT_PAIRS });
        }
        let p1 = survival.eta_linear * channel.eps1 * channel.kappa1;
        let p2 = survival.eta_linear * channel.eps2 * channel.kappa2;
        let p_split = channel.beta12;
        let p_both1 = channel.beta1 - channel.beta12;
        let p_both2 = channel.beta2 - channel.beta12;
        for _ in 0..plan.replicas {
            let seed = split_seed(plan.base_seed, index);
            index += 1;
            let mut rng = record_rng(seed);
            let n_pairs = poisson_draw(&mut rng, expected_pairs);
            let mut clicks1: Vec<f64> = Vec::new();
            let mut clicks2: Vec<f64> = Vec::new();
            for _ in 0..n_pairs {
                if rng.gen::<f64>() >= survival.eps_etpa {
                    continue; // pair absorbed
                }
                let stamp = rng.gen_range(0.0..t);
                let route = rng.gen::<f64>();
                if route < p_split {
                    if rng.gen::<f64>() < p1 {
                        clicks1.push(stamp);
                    }
                    if rng.gen::<f64>() < p2 {
                        clicks2.push(stamp);
                    }
                } else if route < p_split + p_both1 {
                    if rng.gen::<f64>() < p1 {
                        clicks1.push(stamp);
                    }
                } else if route < p_split + p_both1 + p_both2 && rng.gen::<f64>() < p2 {
                    clicks2.push(stamp);
                }
                // Remaining probability mass: pair leaves through an
                // unmonitored port.
            }
            let dark1 = poisson_draw(&mut rng, config.detector.dark_rate_1 * t);
            for _ in 0..dark1 {
                clicks1.push(rng.gen_range(0.0..t));
            }
            let dark2 = poisson_draw(&mut rng, config.detector.dark_rate_2 * t);
            for _ in 0..dark2 {
                clicks2.push(rng.gen_range(0.0..t));
            }
            clicks1.sort_unstable_by(f64::total_cmp);
            clicks2.sort_unstable_by(f64::total_cmp);
            let coincidences = match_coincidences(&clicks1, &clicks2, window_s);
            records.push(CountRecord {
                arm: point.arm,
                delay_fs: point.delay_fs,
                pump_mw: point.pump_mw,
                concentration_molar: point.concentration_molar,
                integration_s: t,
                singles1: clicks1.len() as u64,
                singles2: clicks2.len() as u64,
                coincidences,
                dark1,
                dark2,
                seed,
            });
        }
    }
    Ok(records)
}

/// Greedy earliest-first coincidence matching over two sorted click
/// streams. Two clicks match when they fall within a window of full width
/// `window_s` (i.e. `|t1 - t2| <= window_s / 2`), and every click is usable
/// once. For uncorrelated streams this reproduces the accidental rate
/// `tau_c * r1 * r2`.
pub fn match_coincidences(clicks1: &[f64], clicks2: &[f64], window_s: f64) -> u64 {
    let half = window_s / 2.0;
    let mut i = 0;
    let mut j = 0;
    let mut matched = 0;
    while i < clicks1.len() && j < clicks2.len() {
        let dt = clicks1[i] - clicks2[j];
        if dt.abs() <= half {
            matched += 1;
            i += 1;
            j += 1;
        } else if clicks1[i] < clicks2[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    matched
}
