//! Empirical checks of how the fiber form moves away from `ξ = 0`.
//!
//! For `α < 1` the difference `A(ξ) - A(0)` is bounded in norm by
//! `mu_plus c1 |ξ|^α`. For `α >= 1` only a relative form bound holds, with
//! modulus `Θ(ξ)`; it is checked by requiring that the measured ratio
//! `r(ξ) / Θ(ξ)` stays within a factor of ten across the supplied `ξ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{assemble_fiber_matrix, ModeSet};
use crate::coefficient::{c1_by_quadrature, euclidean_norm, theta, CertifiedCoefficient, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_norm, quadratic_form, CVector};

/// Largest allowed max/min spread of `r(ξ) / Θ(ξ)`.
pub const RATIO_SPREAD_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct FormDifferenceRow {
    pub xi_norm: f64,
    /// `‖A(ξ) - A(0)‖` for `α < 1`, `r(ξ)` otherwise.
    pub measured: f64,
    /// `mu_plus c1 |ξ|^α` for `α < 1`, `Θ(ξ)` otherwise.
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormDifferenceReport {
    pub alpha: f64,
    pub c1: Option<f64>,
    pub rows: Vec<FormDifferenceRow>,
    /// Max/min of the ratio column over nonzero `ξ` (relative-bound regime).
    pub spread: Option<f64>,
}

/// Runs the form-difference check over `xi_list`, using `trials` seeded
/// random vectors in the relative-bound regime.
pub fn form_difference_checks(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    c0: f64,
    modes: &ModeSet,
    xi_list: &[Vec<f64>],
    trials: usize,
    seed: u64,
) -> Result<FormDifferenceReport> {
    let d = params.dimension();
    let alpha = params.alpha();
    let mu_plus = coeff.mu_plus();
    let base = assemble_fiber_matrix(coeff, params, c0, modes, &vec![0.0; d])?.entries;

    if alpha < 1.0 {
        let c1 = c1_by_quadrature(params)?;
        let mut rows = Vec::with_capacity(xi_list.len());
        for xi in xi_list {
            let a = assemble_fiber_matrix(coeff, params, c0, modes, xi)?.entries;
            let measured = hermitian_norm(&(a - &base))?;
            let r = euclidean_norm(xi);
            let reference = mu_plus * c1 * r.powf(alpha);
            if measured > reference {
                return Err(Error::BoundViolated {
                    xi_norm: r,
                    margin: measured - reference,
                });
            }
            let ratio = if reference > 0.0 { measured / reference } else { 0.0 };
            rows.push(FormDifferenceRow {
                xi_norm: r,
                measured,
                reference,
                ratio,
            });
        }
        return Ok(FormDifferenceReport {
            alpha,
            c1: Some(c1),
            rows,
            spread: None,
        });
    }

    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial vector is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = modes.len();
    let vectors: Vec<CVector> = (0..trials)
        .map(|_| {
            CVector::from_fn(size, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        })
        .collect();
    let denominators: Vec<f64> = vectors
        .iter()
        .map(|u| quadratic_form(&base, u) + mu_plus * u.norm_squared())
        .collect();

    let mut rows = Vec::with_capacity(xi_list.len());
    for xi in xi_list {
        let diff = assemble_fiber_matrix(coeff, params, c0, modes, xi)?.entries - &base;
        let measured = vectors
            .iter()
            .zip(&denominators)
            .map(|(u, den)| quadratic_form(&diff, u).abs() / den)
            .fold(0.0_f64, f64::max);
        let r = euclidean_norm(xi);
        let reference = theta(alpha, r);
        let ratio = if reference > 0.0 { measured / reference } else { 0.0 };
        rows.push(FormDifferenceRow {
            xi_norm: r,
            measured,
            reference,
            ratio,
        });
    }
    let (lo, hi, worst) =
        rows.iter()
            .filter(|row| row.xi_norm > 0.0)
            .fold((f64::INFINITY, 0.0_f64, 0.0), |(lo, hi, worst), row| {
                if row.ratio > hi {
                    (lo.min(row.ratio), row.ratio, row.xi_norm)
                } else {
                    (lo.min(row.ratio), hi, worst)
                }
            });
    let spread = if lo.is_finite() && lo > 0.0 {
        Some(hi / lo)
    } else if hi == 0.0 {
        Some(1.0)
    } else {
        None
    };
    match spread {
        Some(s) if s <= RATIO_SPREAD_LIMIT => {}
        other => {
            return Err(Error::BoundViolated {
                xi_norm: worst,
                margin: other.unwrap_or(f64::INFINITY) - RATIO_SPREAD_LIMIT,
            })
        }
    }
    Ok(FormDifferenceReport {
        alpha,
        c1: None,
        rows,
        spread,
    })
}

/// The standard dyadic `ξ` list `0.3 · 2^(-j)`, `j = 0..8`, along the first axis.
pub fn dyadic_xi_list(dimension: usize) -> Vec<Vec<f64>> {
    (0..8)
        .map(|j| {
            let mut xi = vec![0.0; dimension];
            xi[0] = 0.3 * 0.5_f64.powi(j);
            xi
        })
        .collect()
}
