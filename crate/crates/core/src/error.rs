use std::fmt;

use thiserror::Error;

/// One violated invariant, addressed by the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// All invariant violations found in one validation pass. Checks are
/// aggregated rather than short-circuited so a bad config reports every
/// problem at once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            field: field.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// Convert into a `Result`, erroring when any issue was recorded.
    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration:\n{0}")]
    Validation(ValidationReport),

    #[error("dark-corrected rate {label} = {value} s^-1 is not positive")]
    DegenerateRate { label: &'static str, value: f64 },

    #[error("{what} must be positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },

    #[error("pair survival {value} falls outside [0, 1]")]
    SurvivalOutOfRange { value: f64 },

    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("singular design matrix: all abscissae coincide")]
    SingularDesign,

    #[error(
        "fit did not converge after {iterations} iterations \
         (chi2 = {chi2:.6e}, residual norm = {residual_norm:.6e})"
    )]
    FitDidNotConverge {
        iterations: usize,
        chi2: f64,
        residual_norm: f64,
    },

    #[error("fitted {quantity} = {value} is outside its plausible range")]
    ImplausibleFit { quantity: &'static str, value: f64 },

    #[error("expected pair count {pairs:.3e} exceeds the event-level guard of {limit:.1e}")]
    TractabilityExceeded { pairs: f64, limit: f64 },

    #[error("series lengths differ: {left} vs {right}")]
    MisalignedSeries { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Single-issue validation error, for operations that check their own
    /// arguments outside of full config validation.
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        let mut report = ValidationReport::default();
        report.push(field, message);
        Error::Validation(report)
    }
}
