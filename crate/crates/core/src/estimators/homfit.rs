//! Nonlinear least-squares fit of the five-parameter interference curve
//!
//! ```text
//! f(x) = a + d * sinc(c1 (x - b)) * exp(-((x - b) / c2)^2)
//! ```
//!
//! with `sinc(x) = sin(x) / x` (unnormalized argument, `sinc(0) = 1`).
//! A negative amplitude `d` describes a coincidence dip, a positive one the
//! bunching peak seen in either output stream. Delays are in fs, rates in
//! s⁻¹.
//!
//! The optimizer is a small Levenberg-Marquardt loop with a central-
//! difference Jacobian, bounded at 500 iterations. Initial guesses come
//! from the data extrema: baseline from the far-delay median, center from
//! the extremum, width from the half-depth crossing, and `c1 = 1/c2`.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;
const N_PARAMS: usize = 5;

/// Which feature the scan is expected to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomShape {
    Dip,
    Peak,
}

/// Fitted interference-curve parameters with the derived visibility and
/// full width at half maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct HomCurveParams {
    /// Baseline rate, s⁻¹.
    pub a: f64,
    /// Delay offset of the feature center, fs.
    pub b: f64,
    /// Sinc scale, fs⁻¹.
    pub c1: f64,
    /// Gaussian width, fs.
    pub c2: f64,
    /// Feature amplitude, s⁻¹; negative for a dip.
    pub d: f64,
    /// `|d| / a`.
    pub visibility: f64,
    /// Full width at half depth of the fitted feature, fs.
    pub fwhm_fs: f64,
    /// Set when the fitted visibility exceeds 1 (small overshoot tolerated
    /// up to 1.05).
    pub overshoot: bool,
    pub chi2: f64,
    pub dof: usize,
}

impl HomCurveParams {
    /// Center-to-baseline rate ratio `(a + d) / a`; 2 for a fully bunched
    /// peak, 1 - V for a dip.
    pub fn center_to_baseline_ratio(&self) -> f64 {
        (self.a + self.d) / self.a
    }

    /// Evaluate the fitted curve.
    pub fn evaluate(&self, x: f64) -> f64 {
        hom_model(&[self.a, self.b, self.c1, self.c2, self.d], x)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// The five-parameter model with `p = [a, b, c1, c2, d]`.
pub fn hom_model(p: &[f64; N_PARAMS], x: f64) -> f64 {
    let u = x - p[1];
    let gauss = (-(u / p[3]) * (u / p[3])).exp();
    p[0] + p[4] * sinc(p[2] * u) * gauss
}

/// Fit the interference curve to `(delay_fs, rate, rate_err)` points.
///
/// Needs at least 7 points spanning the feature. Non-convergence after the
/// bounded iteration count surfaces as an error carrying the last residual
/// state.
pub fn fit_hom_curve(points: &[(f64, f64, f64)], shape: HomShape) -> Result<HomCurveParams> {
    if points.len() < 7 {
        return Err(Error::TooFewPoints { needed: 7, got: points.len() });
    }
    for &(x, y, sigma) in points {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositive { what: "rate_err", value: sigma });
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("points", "delay and rate must be finite"));
        }
    }

    let init = initial_guess(points, shape);
    let (params, chi2, iterations) = levenberg_marquardt(points, init)?;
    let dof = points.len().saturating_sub(N_PARAMS).max(1);
    let _ = iterations;

    let [a, b, c1, c2, d] = params;
    if !(a > 0.0) {
        return Err(Error::ImplausibleFit { quantity: "baseline", value: a });
    }
    let visibility = d.abs() / a;
    if visibility > 1.05 {
        return Err(Error::ImplausibleFit { quantity: "visibility", value: visibility });
    }
    // Report widths with positive sign conventions; the model is even in
    // both c1 and c2.
    let fwhm_fs = numeric_fwhm(&[a, b, c1, c2, d]);
    Ok(HomCurveParams {
        a,
        b,
        c1: c1.abs(),
        c2: c2.abs(),
        d,
        visibility,
        fwhm_fs,
        overshoot: visibility > 1.0,
        chi2,
        dof,
    })
}

/// Starting point derived from the data extrema.
fn initial_guess(points: &[(f64, f64, f64)], shape: HomShape) -> [f64; N_PARAMS] {
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|&(x, y, _)| (x, y)).collect();
    sorted.sort_unstable_by(|p, q| p.0.total_cmp(&q.0));

    let extremum = match shape {
        HomShape::Dip => sorted
            .iter()
            .enumerate()
            .min_by(|p, q| p.1 .1.total_cmp(&q.1 .1))
            .map(|(i, _)| i)
            .unwrap(),
        HomShape::Peak => sorted
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .1.total_cmp(&q.1 .1))
            .map(|(i, _)| i)
            .unwrap(),
    };
    let b0 = sorted[extremum].0;

    // Baseline from the median of the outer 40% of points by distance from
    // the extremum.
    let mut by_distance: Vec<(f64, f64)> =
        sorted.iter().map(|&(x, y)| ((x - b0).abs(), y)).collect();
    by_distance.sort_unstable_by(|p, q| p.0.total_cmp(&q.0));
    let outer_start = (by_distance.len() as f64 * 0.6).floor() as usize;
    let mut outer: Vec<f64> =
        by_distance[outer_start.min(by_distance.len() - 1)..].iter().map(|p| p.1).collect();
    outer.sort_unstable_by(f64::total_cmp);
    let a0 = outer[outer.len() / 2].max(f64::MIN_POSITIVE);

    let d0 = sorted[extremum].1 - a0;

    // Half-depth crossings around the extremum.
    let level = a0 + d0 / 2.0;
    let crossed = |y: f64| match shape {
        HomShape::Dip => y > level,
        HomShape::Peak => y < level,
    };
    let span = sorted.last().unwrap().0 - sorted[0].0;
    let right = sorted[extremum..]
        .iter()
        .find(|&&(_, y)| crossed(y))
        .map(|&(x, _)| x - b0)
        .unwrap_or(span / 6.0);
    let left = sorted[..=extremum]
        .iter()
        .rev()
        .find(|&&(_, y)| crossed(y))
        .map(|&(x, _)| b0 - x)
        .unwrap_or(span / 6.0);
    let half_width = ((right + left) / 2.0).max(span / 100.0);

    let c2_0 = half_width / (2.0_f64.ln()).sqrt();
    let c1_0 = 1.0 / c2_0;
    [a0, b0, c1_0, c2_0, if d0 == 0.0 { -1e-6 * a0 } else { d0 }]
}

fn chi2_of(points: &[(f64, f64, f64)], p: &[f64; N_PARAMS]) -> f64 {
    let mut sum = 0.0;
    for &(x, y, sigma) in points {
        let f = hom_model(p, x);
        if !f.is_finite() {
            return f64::INFINITY;
        }
        let r = (y - f) / sigma;
        sum += r * r;
    }
    sum
}

fn levenberg_marquardt(
    points: &[(f64, f64, f64)],
    mut params: [f64; N_PARAMS],
) -> Result<([f64; N_PARAMS], f64, usize)> {
    let mut chi2 = chi2_of(points, &params);
    let mut lambda = 1e-3;
    // Typical magnitudes for finite-difference steps, from the data scale.
    let span = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let y_scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1.0);
    let typical = [y_scale, span.max(1.0), 1.0 / span.max(1.0), span.max(1.0), y_scale];

    for iteration in 0..MAX_ITERATIONS {
        // Weighted Jacobian and gradient by central differences.
        let mut jtj = [[0.0; N_PARAMS]; N_PARAMS];
        let mut jtr = [0.0; N_PARAMS];
        let mut rows: Vec<[f64; N_PARAMS]> = Vec::with_capacity(points.len());
        for &(x, y, sigma) in points {
            let mut row = [0.0; N_PARAMS];
            for k in 0..N_PARAMS {
                let step = 1e-6 * params[k].abs().max(typical[k]);
                let mut plus = params;
                let mut minus = params;
                plus[k] += step;
                minus[k] -= step;
                row[k] = (hom_model(&plus, x) - hom_model(&minus, x)) / (2.0 * step * sigma);
            }
            let residual = (y - hom_model(&params, x)) / sigma;
            for k in 0..N_PARAMS {
                jtr[k] += row[k] * residual;
                for l in 0..N_PARAMS {
                    jtj[k][l] += row[k] * row[l];
                }
            }
            rows.push(row);
        }

        let gradient_norm = jtr.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if gradient_norm < 1e-10 * (1.0 + chi2) {
            return Ok((params, chi2, iteration));
        }

        // Try damped steps until one improves chi2.
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = jtj;
            for k in 0..N_PARAMS {
                damped[k][k] += lambda * jtj[k][k].max(1e-30);
            }
            if let Some(step) = solve(damped, jtr) {
                let mut trial = params;
                for k in 0..N_PARAMS {
                    trial[k] += step[k];
                }
                let trial_chi2 = chi2_of(points, &trial);
                if trial_chi2 < chi2 {
                    let gain = chi2 - trial_chi2;
                    params = trial;
                    chi2 = trial_chi2;
                    lambda = (lambda / 3.0).max(1e-14);
                    improved = true;
                    if gain < 1e-12 * chi2.max(1e-30) {
                        return Ok((params, chi2, iteration + 1));
                    }
                    break;
                }
            }
            lambda *= 8.0;
            if lambda > 1e15 {
                break;
            }
        }
        if !improved {
            // No downhill direction left at any damping: converged.
            return Ok((params, chi2, iteration + 1));
        }
    }
    let residual_norm = chi2.sqrt();
    Err(Error::FitDidNotConverge { iterations: MAX_ITERATIONS, chi2, residual_norm })
}

/// Gaussian elimination with partial pivoting for the 5x5 step equation.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: [[f64; N_PARAMS]; N_PARAMS], mut b: [f64; N_PARAMS]) -> Option<[f64; N_PARAMS]> {
    for col in 0..N_PARAMS {
        let pivot_row = (col..N_PARAMS).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in (col + 1)..N_PARAMS {
            let factor = a[row][col] / a[col][col];
            for k in col..N_PARAMS {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; N_PARAMS];
    for row in (0..N_PARAMS).rev() {
        let mut sum = b[row];
        for k in (row + 1)..N_PARAMS {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Full width at the half-depth level `a + d/2`, found by stepping outward
/// from the center and bisecting the first crossing. The model is even
/// around `b`, so one side suffices. Returns 0 for a flat curve.
fn numeric_fwhm(p: &[f64; N_PARAMS]) -> f64 {
    let [a, b, _, c2, d] = *p;
    if d.abs() < 1e-12 * a.abs().max(1e-300) {
        return 0.0;
    }
    let level = a + d / 2.0;
    let sign_at = |x: f64| (hom_model(p, x) - level).signum();
    let center_sign = sign_at(b);
    let step = c2.abs() / 256.0;
    let mut x = b;
    let mut crossing = None;
    for _ in 0..(256 * 50) {
        let next = x + step;
        if sign_at(next) != center_sign {
            crossing = Some((x, next));
            break;
        }
        x = next;
    }
    let (mut lo, mut hi) = match crossing {
        Some(bracket) => bracket,
        None => return 0.0,
    };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if sign_at(mid) == center_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * (0.5 * (lo + hi) - b)
}
