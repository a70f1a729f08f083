//! Minimum-chi-square straight-line fit with per-point Gaussian errors.

use crate::error::{Error, Result};

use super::Uncertain;

/// Generic least-squares result: parameter vector, covariance matrix,
/// chi-square at the optimum, and degrees of freedom. Straight-line fits
/// store `params = [intercept, slope]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub dof: usize,
}

impl FitResult {
    /// One-sigma uncertainty of parameter `i`.
    pub fn uncertainty(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }

    /// Intercept of a straight-line fit.
    pub fn intercept(&self) -> Uncertain {
        Uncertain::new(self.params[0], self.uncertainty(0))
    }

    /// Slope of a straight-line fit.
    pub fn slope(&self) -> Uncertain {
        Uncertain::new(self.params[1], self.uncertainty(1))
    }
}

/// Weighted least-squares fit of `y = intercept + slope * x` to points
/// `(x, y, y_err)` with weights `1 / y_err^2`. Uses the centered normal
/// equations for numerical stability.
pub fn weighted_linear_fit(points: &[(f64, f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: points.len() });
    }
    let mut weight_sum = 0.0;
    let mut x_mean = 0.0;
    let mut y_mean = 0.0;
    for &(x, y, sigma) in points {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositive { what: "y_err", value: sigma });
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("points", "x and y must be finite"));
        }
        let w = 1.0 / (sigma * sigma);
        weight_sum += w;
        x_mean += w * x;
        y_mean += w * y;
    }
    x_mean /= weight_sum;
    y_mean /= weight_sum;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y, sigma) in points {
        let w = 1.0 / (sigma * sigma);
        let dx = x - x_mean;
        sxx += w * dx * dx;
        sxy += w * dx * (y - y_mean);
    }
    // All abscissae coincide: the slope is unconstrained.
    let x_scale: f64 = points.iter().map(|p| p.0 * p.0).sum::<f64>() / points.len() as f64;
    if sxx <= x_scale * weight_sum * 1e-28 {
        return Err(Error::SingularDesign);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let var_slope = 1.0 / sxx;
    let var_intercept = 1.0 / weight_sum + x_mean * x_mean / sxx;
    let covar = -x_mean / sxx;

    let chi2 = points
        .iter()
        .map(|&(x, y, sigma)| {
            let r = (y - intercept - slope * x) / sigma;
            r * r
        })
        .sum();

    Ok(FitResult {
        params: vec![intercept, slope],
        covariance: vec![vec![var_intercept, covar], vec![covar, var_slope]],
        chi2,
        dof: points.len() - 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let points: Vec<(f64, f64, f64)> = (0..10)
            .map(|i| {
                let x = i as f64;
                (x, 2.0 * x + 1.0, 0.5 + 0.1 * x)
            })
            .collect();
        let fit = weighted_linear_fit(&points).unwrap();
        assert!((fit.slope().value - 2.0).abs() < 1e-12);
        assert!((fit.intercept().value - 1.0).abs() < 1e-12);
        assert!(fit.chi2 < 1e-20);
        assert_eq!(fit.dof, 8);
    }

    #[test]
    fn two_distinct_abscissae_suffice() {
        let fit =
            weighted_linear_fit(&[(0.0, 1.0, 0.1), (1.0, 3.0, 0.1), (1.0, 3.2, 0.1)]).unwrap();
        assert_eq!(fit.dof, 1);
        assert!(fit.slope().value > 1.5);
    }

    #[test]
    fn singular_design_is_rejected() {
        let err =
            weighted_linear_fit(&[(2.0, 1.0, 0.1), (2.0, 2.0, 0.1), (2.0, 3.0, 0.1)]).unwrap_err();
        assert!(matches!(err, Error::SingularDesign));
    }

    #[test]
    fn too_few_points_and_bad_errors_are_rejected() {
        assert!(matches!(
            weighted_linear_fit(&[(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(weighted_linear_fit(&[(0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (2.0, 2.0, 1.0)]).is_err());
    }

    #[test]
    fn covariance_matches_textbook_unit_weights() {
        // Equal sigma = 1: var(slope) = 1 / sum((x - xbar)^2).
        let points: Vec<(f64, f64, f64)> =
            (0..5).map(|i| (i as f64, 0.3 * i as f64 - 0.2, 1.0)).collect();
        let fit = weighted_linear_fit(&points).unwrap();
        let sxx: f64 = points.iter().map(|p| (p.0 - 2.0) * (p.0 - 2.0)).sum();
        assert!((fit.covariance[1][1] - 1.0 / sxx).abs() < 1e-12);
        assert!((fit.covariance[0][1] - fit.covariance[1][0]).abs() < 1e-15);
    }
}
