//! Simulation and analysis toolkit for transmission-mode entangled
//! two-photon absorption (ETPA) experiments.
//!
//! The crate covers the full loop of a photon-counting transmission
//! measurement on an SPDC pair source:
//!
//! * [`domain`] — shared value types, unit conventions, and configuration
//!   validation;
//! * [`forward`] — analytic, noise-free rate predictions for the source,
//!   sample channel, and detectors;
//! * [`montecarlo`] — Poisson-level and event-level count generation with
//!   counter-based deterministic seeding;
//! * [`estimators`] — dark/accidental correction, `g2(0)`, biphoton-rate
//!   and cross-section estimators, sensitivity bounds, weighted and
//!   nonlinear least squares, and error propagation.
//!
//! The central physics distinction maintained throughout: one-photon
//! (linear) loss acts on each photon independently, while two-photon
//! absorption removes pairs. Ratio estimators built on `r1 r2 / r12`
//! cancel the former exactly and respond only to the latter.

pub mod domain;
pub mod error;
pub mod estimators;
pub mod forward;
pub mod montecarlo;

pub use domain::{
    molecules_per_area, validate_config, Arm, ChannelParams, CountRecord, CrossSectionEstimate,
    DetectorParams, ExperimentConfig, Geometry, RateTriple, SampleParams, SigmaMethod,
    SourceParams, SweepSpec, AVOGADRO,
};
pub use error::{Error, Result, ValidationReport};
pub use forward::SurvivalFactors;
pub use montecarlo::{SimulationMode, SimulationPlan};
