//! Threshold quantities at small quasimomentum: the bottom eigenvalue, the
//! distance of its projector `F` from the constant-mode projector `P`, and
//! how well `A F` is approximated by `rho P` and by the effective symbol.

use num_complex::Complex64;
use serde::Serialize;

use super::eig_hermitian;
use super::projector::{projector_by_eig, riesz_adaptive, RieszSettings};
use crate::coefficient::{euclidean_norm, CertifiedCoefficient, ModelParams, TheoryConstants};
use crate::error::{Error, Result};
use crate::fiber::{assemble_fiber_matrix, rho_and_rho_star, ModeSet};
use crate::linalg::{hermitian_norm, spectral_norm, CMatrix};

/// Per-`ξ` threshold report.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub xi: Vec<f64>,
    pub xi_norm: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `‖F - P‖`.
    pub f_minus_p_norm: f64,
    /// `‖A F - rho P‖`.
    pub phi_norm: f64,
    /// `‖A F - mu0 V_α(ξ) P‖`.
    pub af_minus_effective_norm: f64,
    pub rho: f64,
    pub rho_star: f64,
    /// `‖F_riesz - F_eig‖`.
    pub projector_difference: f64,
    pub contour_nodes: usize,
    /// Whether `|ξ| <= δ0`; outside the ball the report is produced only when
    /// the contour still isolates exactly one eigenvalue.
    pub inside_ball: bool,
}

/// Settings for [`threshold_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    pub riesz: RieszSettings,
    /// Largest accepted `‖F_riesz - F_eig‖`.
    pub projector_tol: f64,
    /// Accept `|ξ| > δ0` when `λ2 >= d0` and `λ1` is the only eigenvalue
    /// enclosed by the contour.
    pub allow_outside_ball: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            riesz: RieszSettings::default(),
            projector_tol: 1e-8,
            allow_outside_ball: false,
        }
    }
}

/// Computes the threshold report at `xi`. Inside the ball `|ξ| <= δ0` the
/// projector is the spectral projector of `[0, d0/3]`; outside it (when
/// allowed) it is the projector of the spectrum enclosed by the contour,
/// which must consist of `λ1` alone with `λ2 >= d0`. The eigenvector route
/// is confirmed by the contour integral to within `projector_tol`.
pub fn threshold_report(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    constants: &TheoryConstants,
    modes: &ModeSet,
    xi: &[f64],
    options: &ThresholdOptions,
) -> Result<ThresholdReport> {
    let xi_norm = euclidean_norm(xi);
    let inside_ball = xi_norm <= constants.delta0;
    if !inside_ball && !options.allow_outside_ball {
        return Err(Error::OutsideThresholdBall {
            xi_norm,
            delta0: constants.delta0,
        });
    }
    let a = assemble_fiber_matrix(coeff, params, constants.c0, modes, xi)?;
    let spectral = eig_hermitian(&a)?;
    let cutoff = if inside_ball {
        constants.d0 / 3.0
    } else {
        let lambda2 = spectral.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY);
        if lambda2 < constants.d0 {
            return Err(Error::GapViolation {
                count: 2,
                cutoff: constants.d0,
            });
        }
        2.0 * constants.d0 / 3.0
    };
    let n = modes.len();
    let z = modes.zero_position();
    let mut p = CMatrix::zeros(n, n);
    p[(z, z)] = Complex64::new(1.0, 0.0);
    let mut f = projector_by_eig(&spectral, cutoff)?;
    let mut lambda1 = spectral.eigenvalues[0];
    // An exactly vanishing zero-mode column makes e0 an exact null vector;
    // with the eigenvalue count already checked, F is then exactly P.
    if a.entries.column(z).iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        f = p.clone();
        lambda1 = 0.0;
    }
    let contour = riesz_adaptive(&a.entries, &spectral.eigenvalues, constants.d0, &options.riesz)?;
    let projector_difference = spectral_norm(&(&contour.f - &f));
    if projector_difference > options.projector_tol {
        return Err(Error::ProjectorMismatch {
            difference: projector_difference,
            tolerance: options.projector_tol,
        });
    }

    let lambda2 = spectral.eigenvalues.get(1).copied().unwrap_or(f64::INFINITY);
    let (rho, rho_star) = rho_and_rho_star(coeff, params, constants.c0, xi)?;
    let v_alpha = if xi_norm == 0.0 {
        0.0
    } else {
        constants.c0 * xi_norm.powf(params.alpha())
    };
    let af = &f * Complex64::new(lambda1, 0.0);
    let f_minus_p_norm = hermitian_norm(&(&f - &p))?;
    let phi_norm = hermitian_norm(&(&af - &p * Complex64::new(rho, 0.0)))?;
    let af_minus_effective_norm = hermitian_norm(&(&af - &p * Complex64::new(constants.mu_eff * v_alpha, 0.0)))?;
    Ok(ThresholdReport {
        xi: xi.to_vec(),
        xi_norm,
        lambda1,
        lambda2,
        f_minus_p_norm,
        phi_norm,
        af_minus_effective_norm,
        rho,
        rho_star,
        projector_difference,
        contour_nodes: contour.nodes,
        inside_ball,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::PeriodicCoefficient;

    fn setup(c: PeriodicCoefficient, alpha: f64) -> (CertifiedCoefficient, ModelParams, TheoryConstants, ModeSet) {
        let p = ModelParams::new(1, alpha).unwrap();
        let cc = CertifiedCoefficient::with_default_grid(c).unwrap();
        let t = TheoryConstants::new(&p, &cc).unwrap();
        (cc, p, t, ModeSet::new(1, 16).unwrap())
    }

    #[test]
    fn origin_is_all_zero() {
        let (cc, p, t, modes) = setup(PeriodicCoefficient::product_cosine(1, 0.5), 0.5);
        let r = threshold_report(&cc, &p, &t, &modes, &[0.0], &ThresholdOptions::default()).unwrap();
        assert!(r.f_minus_p_norm < 1e-12);
        assert!(r.phi_norm < 1e-12);
        assert_eq!((r.rho, r.rho_star), (0.0, 0.0));
        assert_eq!(r.lambda1, 0.0);
        assert_eq!(r.f_minus_p_norm, 0.0);
    }

    #[test]
    fn constant_coefficient_has_no_threshold_error() {
        let (cc, p, t, modes) = setup(PeriodicCoefficient::constant(1, 1.0), 1.5);
        for xi in [0.01, 0.1, t.delta0] {
            let r = threshold_report(&cc, &p, &t, &modes, &[xi], &ThresholdOptions::default()).unwrap();
            assert_eq!(r.f_minus_p_norm, 0.0);
            assert!(r.af_minus_effective_norm <= 1e-14 * r.lambda1.max(1.0));
        }
    }

    #[test]
    fn eigenvalue_bounds_inside_ball() {
        let (cc, p, t, modes) = setup(PeriodicCoefficient::difference_cosine(1, 0.5), 1.0);
        for xi in [0.02, 0.1, t.delta0] {
            let r = threshold_report(&cc, &p, &t, &modes, &[xi], &ThresholdOptions::default()).unwrap();
            let v = t.c0 * xi;
            assert!(t.mu_minus * v <= r.lambda1 && r.lambda1 <= t.mu_plus * v + 1e-12);
            assert!(r.lambda2 >= t.d0);
            assert!(r.f_minus_p_norm <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn outside_ball_is_rejected() {
        let (cc, p, t, modes) = setup(PeriodicCoefficient::product_cosine(1, 0.5), 1.0);
        assert!(matches!(
            threshold_report(&cc, &p, &t, &modes, &[1.01 * t.delta0], &ThresholdOptions::default()),
            Err(Error::OutsideThresholdBall { .. })
        ));
    }

    #[test]
    fn separated_points_outside_ball() {
        let (cc, p, t, modes) = setup(PeriodicCoefficient::product_cosine(1, 0.5), 0.5);
        let options = ThresholdOptions {
            allow_outside_ball: true,
            ..ThresholdOptions::default()
        };
        let r = threshold_report(&cc, &p, &t, &modes, &[0.1], &options).unwrap();
        assert!(!r.inside_ball);
        assert!(r.lambda1 > t.d0 / 3.0 && r.lambda2 >= t.d0);
        assert!(r.projector_difference <= 1e-8);
    }
}
