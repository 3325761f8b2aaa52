//! Fiber resolvent differences at spectral parameter `s = ε^α`.

use num_complex::Complex64;

use crate::coefficient::{euclidean_norm, CertifiedCoefficient, ModelParams, TheoryConstants};
use crate::error::{Error, Result};
use crate::fiber::{assemble_effective_fiber, assemble_fiber_matrix, ModeSet};
use crate::linalg::{hermitian_norm, CMatrix};
use crate::spectral::{eig_hermitian, SpectralData};

/// Eigendecomposed fiber and its effective counterpart at one `ξ`, ready to
/// be evaluated at many spectral parameters.
#[derive(Debug, Clone)]
pub struct FiberResolvents {
    pub xi: Vec<f64>,
    pub spectral: SpectralData,
    pub effective: Vec<f64>,
    zero_position: usize,
}

impl FiberResolvents {
    pub fn new(
        coeff: &CertifiedCoefficient,
        params: &ModelParams,
        constants: &TheoryConstants,
        modes: &ModeSet,
        xi: &[f64],
    ) -> Result<Self> {
        let a = assemble_fiber_matrix(coeff, params, constants.c0, modes, xi)?;
        let spectral = eig_hermitian(&a)?;
        let effective = assemble_effective_fiber(params, constants.c0, constants.mu_eff, modes, xi)?.diagonal;
        Ok(Self {
            xi: xi.to_vec(),
            spectral,
            effective,
            zero_position: modes.zero_position(),
        })
    }

    /// `(A + s)^(-1)` from the eigendecomposition.
    fn resolvent(&self, s: f64) -> CMatrix {
        let v = &self.spectral.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.spectral.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / (lambda + s));
        }
        scaled * v.adjoint()
    }

    /// `‖(A + s)^(-1) - (A0 + s)^(-1)‖`.
    pub fn difference_norm(&self, s: f64) -> Result<f64> {
        let mut d = self.resolvent(s);
        for (i, &a0) in self.effective.iter().enumerate() {
            d[(i, i)] -= Complex64::new(1.0 / (a0 + s), 0.0);
        }
        hermitian_norm(&d)
    }

    /// `‖(A + s)^(-1) - (mu0 V_α(ξ) + s)^(-1) P‖` with `P` the constant-mode
    /// projector; `mu0 V_α(ξ)` is the zero-mode entry of the effective fiber.
    pub fn threshold_difference_norm(&self, s: f64) -> Result<f64> {
        let mut d = self.resolvent(s);
        let z = self.zero_position;
        d[(z, z)] -= Complex64::new(1.0 / (self.effective[z] + s), 0.0);
        hermitian_norm(&d)
    }
}

fn spectral_parameter(params: &ModelParams, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(epsilon.powf(params.alpha()))
}

/// `‖(A(ξ) + ε^α)^(-1) - (A0(ξ) + ε^α)^(-1)‖`.
pub fn fiber_resolvent_diff(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    constants: &TheoryConstants,
    modes: &ModeSet,
    xi: &[f64],
    epsilon: f64,
) -> Result<f64> {
    let s = spectral_parameter(params, epsilon)?;
    FiberResolvents::new(coeff, params, constants, modes, xi)?.difference_norm(s)
}

/// `‖(A(ξ) + ε^α)^(-1) - (mu0 V_α(ξ) + ε^α)^(-1) P‖` for `|ξ| <= δ0`.
pub fn threshold_resolvent_diff(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    constants: &TheoryConstants,
    modes: &ModeSet,
    xi: &[f64],
    epsilon: f64,
) -> Result<f64> {
    let xi_norm = euclidean_norm(xi);
    if xi_norm > constants.delta0 {
        return Err(Error::OutsideThresholdBall {
            xi_norm,
            delta0: constants.delta0,
        });
    }
    let s = spectral_parameter(params, epsilon)?;
    FiberResolvents::new(coeff, params, constants, modes, xi)?.threshold_difference_norm(s)
}
