//! Analysis mathematics: dark/accidental correction, the zero-delay
//! second-order correlation function, biphoton-rate and cross-section
//! estimators, the transmittance sensitivity bound, the slope-ratio signal,
//! reference-based drift correction, and first-order Poissonian error
//! propagation.
//!
//! Everything here is a pure function of its inputs.

mod homfit;
mod linfit;

pub use homfit::{fit_hom_curve, hom_model, HomCurveParams, HomShape};
pub use linfit::{weighted_linear_fit, FitResult};

use crate::domain::{
    molecules_per_area, ChannelParams, CrossSectionEstimate, RateTriple, SigmaMethod,
};
use crate::error::{Error, Result};

/// A scalar with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertain {
    pub value: f64,
    pub sigma: f64,
}

impl Uncertain {
    pub fn new(value: f64, sigma: f64) -> Uncertain {
        Uncertain { value, sigma }
    }

    /// `|value| < k * sigma`.
    pub fn within_n_sigma_of_zero(&self, k: f64) -> bool {
        self.value.abs() < k * self.sigma
    }
}

/// Dark- and accidental-corrected rates. A dedicated type so a triple
/// cannot be corrected twice by accident.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedRates {
    pub r1: f64,
    pub r2: f64,
    pub r12: f64,
    pub err1: f64,
    pub err2: f64,
    pub err12: f64,
}

/// Subtract the dark/accidental baselines: `r_mu - phi_mu` for each of the
/// three rates. The baselines are treated as exactly known (configured dark
/// rates, computed accidentals), so the quadrature sum of uncertainties
/// reduces to the raw rate error.
///
/// Any corrected rate that is not strictly positive is unusable in the
/// downstream ratio estimators and reported as a degenerate rate.
pub fn corrected_rates(raw: &RateTriple) -> Result<CorrectedRates> {
    let r1 = raw.r1 - raw.phi1;
    let r2 = raw.r2 - raw.phi2;
    let r12 = raw.r12 - raw.phi12;
    for (label, value) in [("r1", r1), ("r2", r2), ("r12", r12)] {
        if !(value > 0.0) {
            return Err(Error::DegenerateRate { label, value });
        }
    }
    Ok(CorrectedRates {
        r1,
        r2,
        r12,
        err1: raw.err1,
        err2: raw.err2,
        err12: raw.err12,
    })
}

/// Zero-delay second-order correlation function,
/// `g2 = r12 / (tau_c * r1 * r2)`, with its first-order Poisson error.
pub fn g2_zero(rates: &CorrectedRates, window_ns: f64) -> Result<Uncertain> {
    let tau_c = window_ns * 1e-9;
    let denominator = tau_c * rates.r1 * rates.r2;
    if !(denominator > 0.0) {
        return Err(Error::NonPositive { what: "g2 denominator", value: denominator });
    }
    let value = rates.r12 / denominator;
    let rel = (square(rates.err12 / rates.r12)
        + square(rates.err1 / rates.r1)
        + square(rates.err2 / rates.r2))
    .sqrt();
    Ok(Uncertain::new(value, value.abs() * rel))
}

/// Biphoton rate reaching the cuvette,
/// `R2 = (beta12 / (beta1 beta2)) * r1 r2 / r12`.
///
/// Every per-photon efficiency appears once in the numerator product and
/// once in the coincidence rate, so the estimate is independent of linear
/// losses; only pair-wise loss survives the ratio.
pub fn biphoton_rate(rates: &CorrectedRates, channel: &ChannelParams) -> Result<Uncertain> {
    if !(rates.r12 > 0.0) {
        return Err(Error::NonPositive { what: "coincidence rate", value: rates.r12 });
    }
    let geometry = channel.beta12 / (channel.beta1 * channel.beta2);
    let value = geometry * rates.r1 * rates.r2 / rates.r12;
    let rel = (square(rates.err1 / rates.r1)
        + square(rates.err2 / rates.r2)
        + square(rates.err12 / rates.r12))
    .sqrt();
    Ok(Uncertain::new(value, value.abs() * rel))
}

/// Loss-immune absorption signal `1 - g2_solv / g2_sam`: the fraction of
/// incident biphotons removed as pairs. Negative values are reported as-is.
pub fn etpa_signal_g2(solvent: Uncertain, sample: Uncertain) -> Result<Uncertain> {
    if !(sample.value > 0.0) {
        return Err(Error::NonPositive { what: "sample g2", value: sample.value });
    }
    let ratio = solvent.value / sample.value;
    let sigma = (square(solvent.sigma / sample.value)
        + square(solvent.value * sample.sigma / square(sample.value)))
    .sqrt();
    Ok(Uncertain::new(1.0 - ratio, sigma))
}

/// Cross-section from the correlation-function signal:
/// `sigma = signal / (c l N_A)`.
pub fn sigma_from_g2(
    signal: Uncertain,
    concentration_molar: f64,
    path_length_cm: f64,
) -> Result<CrossSectionEstimate> {
    if !(concentration_molar > 0.0) {
        return Err(Error::NonPositive { what: "concentration", value: concentration_molar });
    }
    let area_density = molecules_per_area(concentration_molar, path_length_cm)?;
    Ok(CrossSectionEstimate {
        value: signal.value / area_density,
        abs_error: signal.sigma / area_density,
        method: SigmaMethod::G2,
        concentration_molar,
    })
}

/// Cross-section from the standard transmittance scheme:
/// `sigma = m / (c l N_A)` with `m` the fitted slope of absorbed vs
/// incident rate. `method` records which count series produced the slope
/// and must be one of the standard variants.
pub fn sigma_standard(
    slope: Uncertain,
    method: SigmaMethod,
    concentration_molar: f64,
    path_length_cm: f64,
) -> Result<CrossSectionEstimate> {
    if !matches!(method, SigmaMethod::StandardSingles | SigmaMethod::StandardCoincidence) {
        return Err(Error::invalid("method", "sigma_standard expects a standard_* method tag"));
    }
    if !(concentration_molar > 0.0) {
        return Err(Error::NonPositive { what: "concentration", value: concentration_molar });
    }
    let area_density = molecules_per_area(concentration_molar, path_length_cm)?;
    Ok(CrossSectionEstimate {
        value: slope.value / area_density,
        abs_error: slope.sigma.abs() / area_density,
        method,
        concentration_molar,
    })
}

/// Signal from the per-channel transmission slopes, `1 - m1 m2 / m12`.
/// Pure per-photon loss gives `m1 m2 = m12` and a zero signal; pair-wise
/// loss scales all three slopes alike and survives.
pub fn etpa_signal_slopes(m1: Uncertain, m2: Uncertain, m12: Uncertain) -> Result<Uncertain> {
    if m12.value == 0.0 {
        return Err(Error::NonPositive { what: "coincidence slope m12", value: m12.value });
    }
    let ratio = m1.value * m2.value / m12.value;
    let sigma = (square(m2.value / m12.value * m1.sigma)
        + square(m1.value / m12.value * m2.sigma)
        + square(ratio / m12.value * m12.sigma))
    .sqrt();
    Ok(Uncertain::new(1.0 - ratio, sigma))
}

/// Smallest cross-section a transmittance measurement can distinguish from
/// zero at Poissonian precision: `sigma_LB = b / (c l N_A)` with
/// `b = 1 / sqrt(r_solv)`.
pub fn sensitivity_bound(
    solvent_rate: f64,
    concentration_molar: f64,
    path_length_cm: f64,
) -> Result<f64> {
    if !(solvent_rate > 0.0) {
        return Err(Error::NonPositive { what: "solvent rate", value: solvent_rate });
    }
    if !(concentration_molar > 0.0) {
        return Err(Error::NonPositive { what: "concentration", value: concentration_molar });
    }
    let b = 1.0 / solvent_rate.sqrt();
    Ok(b / molecules_per_area(concentration_molar, path_length_cm)?)
}

/// Drift-correction factor from the reference arm: the mean over sweep
/// points of the quotient between the reference signal recorded during the
/// solvent run and during the sample run. The corrected coincidence rate is
/// used as the reference signal; it tracks the pair flux linearly.
pub fn reference_correction_factor(
    reference_solvent: &[CorrectedRates],
    reference_sample: &[CorrectedRates],
) -> Result<f64> {
    if reference_solvent.len() != reference_sample.len() {
        return Err(Error::MisalignedSeries {
            left: reference_solvent.len(),
            right: reference_sample.len(),
        });
    }
    if reference_solvent.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let mut sum = 0.0;
    for (solvent, sample) in reference_solvent.iter().zip(reference_sample) {
        if !(sample.r12 > 0.0) || !(solvent.r12 > 0.0) {
            return Err(Error::DegenerateRate { label: "reference r12", value: sample.r12.min(solvent.r12) });
        }
        sum += solvent.r12 / sample.r12;
    }
    Ok(sum / reference_solvent.len() as f64)
}

/// Apply the reference-based drift correction to a sample-arm series: every
/// rate (and its uncertainty) is multiplied by the factor derived from the
/// two aligned reference series, identically for singles and coincidences.
pub fn reference_correction(
    sample_run: &[CorrectedRates],
    reference_solvent: &[CorrectedRates],
    reference_sample: &[CorrectedRates],
) -> Result<(f64, Vec<CorrectedRates>)> {
    if sample_run.len() != reference_sample.len() {
        return Err(Error::MisalignedSeries {
            left: sample_run.len(),
            right: reference_sample.len(),
        });
    }
    let factor = reference_correction_factor(reference_solvent, reference_sample)?;
    let corrected = sample_run
        .iter()
        .map(|r| CorrectedRates {
            r1: r.r1 * factor,
            r2: r.r2 * factor,
            r12: r.r12 * factor,
            err1: r.err1 * factor,
            err2: r.err2 * factor,
            err12: r.err12 * factor,
        })
        .collect();
    Ok((factor, corrected))
}

/// Inverse-variance weighted mean of independent measurements.
pub fn weighted_mean(values: &[Uncertain]) -> Result<Uncertain> {
    if values.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let mut weight_sum = 0.0;
    let mut value_sum = 0.0;
    for v in values {
        if !(v.sigma > 0.0) {
            return Err(Error::NonPositive { what: "measurement sigma", value: v.sigma });
        }
        let w = 1.0 / square(v.sigma);
        weight_sum += w;
        value_sum += w * v.value;
    }
    Ok(Uncertain::new(value_sum / weight_sum, (1.0 / weight_sum).sqrt()))
}

/// First-order Poissonian error propagation (`var(count) = count`).
pub mod propagation {
    /// One-sigma error of a rate estimated as `counts / T`.
    pub fn poisson_rate_error(counts: u64, integration_s: f64) -> f64 {
        (counts as f64).sqrt() / integration_s
    }

    /// One-sigma error of a difference of two count-derived rates,
    /// propagated in quadrature: `sqrt(n_a + n_b) / T`.
    pub fn rate_difference_error(counts_a: u64, counts_b: u64, integration_s: f64) -> f64 {
        ((counts_a + counts_b) as f64).sqrt() / integration_s
    }

    /// First-order relative error of `g2 = n12 / (tau n1 n2)` in terms of
    /// the corrected counts: `sqrt(1/n12 + 1/n1 + 1/n2)`. A zero count has
    /// zero variance and contributes nothing.
    pub fn g2_relative_error(n1: f64, n2: f64, n12: f64) -> f64 {
        let term = |n: f64| if n > 0.0 { 1.0 / n } else { 0.0 };
        (term(n12) + term(n1) + term(n2)).sqrt()
    }
}

fn square(x: f64) -> f64 {
    x * x
}
