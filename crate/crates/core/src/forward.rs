//! Analytic, noise-free rate predictions: pair flux after the delay stage,
//! survival probabilities in the sample channel, and the detected rate
//! triple.
//!
//! Two distinct loss mechanisms act on a pair crossing the cuvette:
//!
//! * `eps_etpa` — the probability that the pair is *not* absorbed as a pair.
//!   Removing a pair removes both photons at once, so this factor enters
//!   singles and coincidences alike.
//! * `eta_linear` — the per-photon survival against one-photon processes
//!   (attenuation, scattering). Each photon is tested independently, so
//!   coincidences pick up the square.
//!
//! This asymmetry is what the correlation-based estimator exploits: the
//! ratio `r1*r2/r12` cancels every per-photon factor but not the pair-wise
//! one.

use crate::domain::{
    molecules_per_area, ChannelParams, DetectorParams, Geometry, RateTriple, SampleParams,
    SourceParams,
};
use crate::error::{Error, Result};

/// Pair-survival factors for one pass through the sample channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalFactors {
    /// Probability that the pair survives two-photon absorption, in [0, 1].
    pub eps_etpa: f64,
    /// Per-photon survival against one-photon loss, in [0, 1].
    pub eta_linear: f64,
}

impl SurvivalFactors {
    /// Lossless channel; used for the reference arm and solvent baselines.
    pub const PASSTHROUGH: SurvivalFactors = SurvivalFactors {
        eps_etpa: 1.0,
        eta_linear: 1.0,
    };

    /// Evaluate both survival factors for a sample at delay `tau_fs` with
    /// correlation time `te_ps`.
    pub fn for_sample(sample: &SampleParams, tau_fs: f64, te_ps: f64) -> Result<SurvivalFactors> {
        Ok(SurvivalFactors {
            eps_etpa: etpa_survival(sample, tau_fs, te_ps)?,
            eta_linear: linear_survival(sample),
        })
    }
}

/// Half-width of the Gaussian delay envelope, in fs, fixed so that the
/// FWHM of the interference dip equals the correlation time Tₑ.
fn envelope_width_fs(te_ps: f64) -> f64 {
    let te_fs = te_ps * 1e3;
    te_fs / (2.0 * (2.0_f64.ln()).sqrt())
}

/// Photon-pair rate arriving at the cuvette, in pairs s⁻¹.
///
/// Collinear sources deliver the full generated flux. A non-collinear
/// source interferes the pair at a beamsplitter first, and each output arm
/// carries `(rate / 4) * (1 + V * exp(-(tau / T_h)^2))`: a quarter of the
/// flux at large delay, rising by the bunching factor 2 at zero delay for
/// unit visibility.
pub fn pair_rate_at_cuvette(source: &SourceParams) -> f64 {
    let generated = source.pump_power_mw * source.pairs_per_mw;
    match source.geometry {
        Geometry::Collinear => generated,
        Geometry::Noncollinear => {
            let th = envelope_width_fs(source.correlation_time_ps);
            let envelope = (-(source.delay_fs / th).powi(2)).exp();
            generated / 4.0 * (1.0 + source.hom_visibility * envelope)
        }
    }
}

/// Probability that a pair crossing the sample is **not** absorbed as a
/// pair: `1 - sigma_e * exp(-(tau/Te)^2) * c * l * N_A`. Absorption needs
/// temporal overlap, so it is suppressed on a Gaussian envelope of width Tₑ.
pub fn etpa_survival(sample: &SampleParams, tau_fs: f64, te_ps: f64) -> Result<f64> {
    let area_density = molecules_per_area(sample.effective_concentration(), sample.path_length_cm)?;
    let te_fs = te_ps * 1e3;
    let envelope = (-(tau_fs / te_fs).powi(2)).exp();
    let eps = 1.0 - sample.sigma_e_cm2 * envelope * area_density;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::SurvivalOutOfRange { value: eps });
    }
    Ok(eps)
}

/// Per-photon survival against one-photon loss, modelled as Beer-Lambert in
/// concentration: `10^(-alpha * c * l)`. Applied independently to each
/// photon of a pair.
pub fn linear_survival(sample: &SampleParams) -> f64 {
    let absorbance =
        sample.alpha_per_molar_cm * sample.effective_concentration() * sample.path_length_cm;
    10.0_f64.powf(-absorbance)
}

/// Detected singles and coincidence rates for a pair flux `pair_rate`
/// passing the survival factors `surv` and the detection channel:
///
/// ```text
/// r1  = eta eps1 kappa1 beta1 * R2 + phi1
/// r2  = eta eps2 kappa2 beta2 * R2 + phi2
/// r12 = eta^2 eps1 eps2 kappa1 kappa2 beta12 * R2 + phi12
/// ```
///
/// with `R2 = eps_etpa * pair_rate` and the accidental baseline
/// `phi12 = tau_c * r1 * r2` computed from the raw singles rates. Rate
/// uncertainties are Poissonian over the configured integration time,
/// `err = sqrt(r / T)`.
pub fn detected_rates(
    pair_rate: f64,
    surv: &SurvivalFactors,
    channel: &ChannelParams,
    detector: &DetectorParams,
) -> RateTriple {
    let r2_flux = surv.eps_etpa * pair_rate;
    let eta = surv.eta_linear;
    let r1 = eta * channel.eps1 * channel.kappa1 * channel.beta1 * r2_flux + detector.dark_rate_1;
    let r2 = eta * channel.eps2 * channel.kappa2 * channel.beta2 * r2_flux + detector.dark_rate_2;
    let phi12 = detector.window_s() * r1 * r2;
    let r12 = eta * eta
        * channel.eps1
        * channel.eps2
        * channel.kappa1
        * channel.kappa2
        * channel.beta12
        * r2_flux
        + phi12;
    let t = detector.integration_time_s;
    RateTriple {
        r1,
        r2,
        r12,
        phi1: detector.dark_rate_1,
        phi2: detector.dark_rate_2,
        phi12,
        err1: (r1 / t).sqrt(),
        err2: (r2 / t).sqrt(),
        err12: (r12 / t).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Geometry;

    fn source(geometry: Geometry, delay_fs: f64, visibility: f64) -> SourceParams {
        SourceParams {
            pump_power_mw: 1.0,
            pairs_per_mw: 1.0e5,
            hom_visibility: visibility,
            correlation_time_ps: 0.20,
            delay_fs,
            geometry,
        }
    }

    fn sample(concentration_molar: f64, sigma_e_cm2: f64, alpha: f64) -> SampleParams {
        SampleParams {
            concentration_molar,
            path_length_cm: 1.0,
            sigma_e_cm2,
            alpha_per_molar_cm: alpha,
            solvent_only: false,
        }
    }

    fn detector() -> DetectorParams {
        DetectorParams {
            dark_rate_1: 200.0,
            dark_rate_2: 200.0,
            coincidence_window_ns: 1.05,
            integration_time_s: 60.0,
        }
    }

    #[test]
    fn collinear_rate_is_pump_times_yield() {
        let rate = pair_rate_at_cuvette(&source(Geometry::Collinear, 0.0, 0.957));
        assert_eq!(rate, 1.0e5);
    }

    #[test]
    fn perfect_bunching_gives_half_per_arm_at_zero_delay() {
        let rate = pair_rate_at_cuvette(&source(Geometry::Noncollinear, 0.0, 1.0));
        assert!((rate - 5.0e4).abs() < 1e-9, "got {rate}");
    }

    #[test]
    fn large_delay_gives_quarter_per_arm() {
        let near = pair_rate_at_cuvette(&source(Geometry::Noncollinear, 0.0, 1.0));
        let far = pair_rate_at_cuvette(&source(Geometry::Noncollinear, 5.0e3, 1.0));
        assert!((far - 2.5e4).abs() < 1e-6, "got {far}");
        assert!((near / far - 2.0).abs() < 1e-9);
    }

    #[test]
    fn measured_visibility_scales_the_peak() {
        let rate = pair_rate_at_cuvette(&source(Geometry::Noncollinear, 0.0, 0.957));
        let expected = 1.0e5 / 4.0 * 1.957;
        assert!((rate - expected).abs() < 1e-9, "got {rate}");
    }

    #[test]
    fn envelope_fwhm_matches_correlation_time() {
        // The flux envelope exp(-(tau/T_h)^2) must fall to half height at
        // tau = Te/2, i.e. FWHM = Te = 200 fs for Te = 0.2 ps.
        let at_half = pair_rate_at_cuvette(&source(Geometry::Noncollinear, 100.0, 1.0));
        let base = 2.5e4;
        let envelope = at_half / base - 1.0;
        assert!((envelope - 0.5).abs() < 1e-12, "envelope at Te/2 = {envelope}");
    }

    #[test]
    fn etpa_survival_without_absorber_is_unity() {
        for tau in [0.0, 150.0, 1.0e4] {
            assert_eq!(etpa_survival(&sample(0.058, 0.0, 0.0), tau, 0.2).unwrap(), 1.0);
        }
    }

    #[test]
    fn etpa_survival_hand_value_at_zero_delay() {
        // sigma = 1e-21 cm^2, 58 mM, 1 cm: 1 - 1e-21 * 3.4928e19 = 0.96507.
        let eps = etpa_survival(&sample(0.058, 1.0e-21, 0.0), 0.0, 0.2).unwrap();
        assert!((eps - 0.965_071_58).abs() < 1e-6, "got {eps}");
    }

    #[test]
    fn etpa_survival_suppressed_at_large_delay() {
        // 667 fs at Te = 0.2 ps: absorption scaled by exp(-11.1222) ~ 1.48e-5.
        let eps = etpa_survival(&sample(0.058, 1.0e-21, 0.0), 667.0, 0.2).unwrap();
        let absorbed = 1.0 - eps;
        let expected = 0.034_928_42 * (-(667.0_f64 / 200.0).powi(2)).exp();
        assert!((absorbed - expected).abs() / expected < 1e-6, "got {absorbed}");
        assert!(absorbed < 6.0e-7);
    }

    #[test]
    fn linear_survival_values() {
        assert_eq!(linear_survival(&sample(0.058, 0.0, 0.0)), 1.0);
        let eta = linear_survival(&sample(0.058, 0.0, 1.0));
        assert!((eta - 0.874_983_775).abs() < 1e-7, "got {eta}");
        let mut solvent = sample(0.058, 0.0, 1.0);
        solvent.solvent_only = true;
        assert_eq!(linear_survival(&solvent), 1.0);
    }

    #[test]
    fn detected_rates_match_hand_evaluation() {
        let channel = ChannelParams {
            eps1: 0.5,
            eps2: 0.5,
            kappa1: 0.8,
            kappa2: 0.8,
            ..ChannelParams::default()
        };
        let rates = detected_rates(1.0e5, &SurvivalFactors::PASSTHROUGH, &channel, &detector());
        assert!((rates.r1 - 30_200.0).abs() < 1e-9, "r1 = {}", rates.r1);
        assert!((rates.r2 - 30_200.0).abs() < 1e-9);
        // Coincidences: 0.25 * 0.64 * 0.5 * 1e5 = 8000 plus accidentals.
        let accidentals = 1.05e-9 * 30_200.0 * 30_200.0;
        assert!((rates.r12 - (8000.0 + accidentals)).abs() < 1e-9, "r12 = {}", rates.r12);
        assert!((rates.phi12 - accidentals).abs() < 1e-12);
        // Poisson error on the rate over 60 s.
        assert!((rates.err1 - (30_200.0_f64 / 60.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn opaque_sample_leaves_only_baselines() {
        let surv = SurvivalFactors { eps_etpa: 1.0, eta_linear: 0.0 };
        let rates = detected_rates(1.0e5, &surv, &ChannelParams::default(), &detector());
        assert_eq!(rates.r1, 200.0);
        assert_eq!(rates.r2, 200.0);
        assert!((rates.r12 - rates.phi12).abs() < 1e-15);
    }
}
