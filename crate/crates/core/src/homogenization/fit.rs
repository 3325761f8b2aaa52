//! Least-squares slope fits on log-log data.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of positive points accepted by the fits.
pub const MIN_FIT_POINTS: usize = 8;

/// Ordinary least squares `y ≈ slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::DegenerateFit(format!(
            "need matching samples, got {} and {}",
            n,
            y.len()
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Slope of `log value` against `log x` over points with positive value.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LineFit> {
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, v)| x > 0.0 && v > 0.0).collect();
    if positive.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} positive points, at least {MIN_FIT_POINTS} required",
            positive.len()
        )));
    }
    if positive.iter().all(|p| p.1 == positive[0].1) {
        return Err(Error::DegenerateFit("all values are equal".into()));
    }
    let x: Vec<f64> = positive.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = positive.iter().map(|p| p.1.ln()).collect();
    least_squares(&x, &y)
}

/// Fitted convergence rate of a discrepancy sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub r_squared: f64,
    /// For `alpha = 1`: slope against `log(ε (1 + |ln ε|)^2)`.
    pub log_corrected_slope: Option<f64>,
    pub log_corrected_r_squared: Option<f64>,
}

/// `ε (1 + |ln ε|)^2`.
pub fn log_corrected_scale(epsilon: f64) -> f64 {
    let l = 1.0 + epsilon.ln().abs();
    epsilon * l * l
}

/// Fits `log value` against `log ε`, and for `alpha = 1` also against
/// `log(ε (1 + |ln ε|)^2)`.
pub fn fit_rate(points: &[(f64, f64)], alpha: f64) -> Result<RateFit> {
    let plain = loglog_fit(points)?;
    let (log_corrected_slope, log_corrected_r_squared) = if alpha == 1.0 {
        let mapped: Vec<(f64, f64)> = points.iter().map(|&(e, v)| (log_corrected_scale(e), v)).collect();
        let fit = loglog_fit(&mapped)?;
        (Some(fit.slope), Some(fit.r_squared))
    } else {
        (None, None)
    };
    Ok(RateFit {
        slope: plain.slope,
        r_squared: plain.r_squared,
        log_corrected_slope,
        log_corrected_r_squared,
    })
}
