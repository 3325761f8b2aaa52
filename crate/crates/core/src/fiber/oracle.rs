//! Independent quadrature of single fiber-form entries (one dimension).
//!
//! For modes `m, n` the entry is
//!
//! ```text
//! Σ_{k+l=m-n} mu_hat[k,l] · ½ ∫_R e^{2πilz} (1 - e^{i(2πn+ξ)z}) (1 - e^{-i(2πm+ξ)z}) |z|^(-1-α) dz
//! ```
//!
//! Expanding the product gives four exponentials; the integrand is even in
//! `z` up to its odd imaginary part, which integrates to zero, so the
//! integral reduces to `∫_0^∞ Σ w_j cos(a_j z) z^(-1-α) dz` with weights
//! `(+1, -1, -1, +1)`.

use num_complex::Complex64;

use crate::coefficient::{CertifiedCoefficient, ModelParams};
use crate::error::{Error, Result};
use crate::quadrature::{cosine_power_integral, PowerQuadConfig};

/// Quadrature value of a matrix entry and its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: Complex64,
    pub error: f64,
}

/// Entry `(m, n)` of the fiber form at `xi` by direct quadrature.
pub fn oracle_form_element(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    m: i32,
    n: i32,
    xi: f64,
    cfg: &PowerQuadConfig,
) -> Result<OracleValue> {
    if params.dimension() != 1 || coeff.dimension() != 1 {
        return Err(Error::InvalidParameter(
            "the quadrature oracle is one-dimensional".into(),
        ));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let alpha = params.alpha();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for ((k, l), amp) in coeff.coefficient().modes() {
        let (k, l) = (k[0], l[0]);
        if k + l != m - n {
            continue;
        }
        let terms = [
            (two_pi * l as f64, 1.0),
            (two_pi * (l + n) as f64 + xi, -1.0),
            (two_pi * (l - m) as f64 - xi, -1.0),
            (two_pi * (l + n - m) as f64, 1.0),
        ];
        let r = cosine_power_integral(&terms, alpha, cfg)?;
        value += amp * r.value;
        error += amp.norm() * r.error;
    }
    Ok(OracleValue { value, error })
}
