//! Galerkin matrices of the fiber operators in the Fourier basis of the cell.
//!
//! With `e_n(x) = exp(2πi n·x)` and `|n|_∞ <= N`, the entry `(m, n)` of the
//! fiber form at quasimomentum `ξ` is
//!
//! ```text
//! (c0/2) Σ_{k+l=m-n} mu_hat[k,l] (|2π(l-m)-ξ|^α + |2π(l+n)+ξ|^α - |2πl|^α - |2πk|^α)
//! ```
//!
//! which follows from `∫ (1 - cos(c·z)) |z|^(-d-α) dz = c0 |c|^α` applied to
//! the four exponentials of the form. [`oracle`] recomputes single entries by
//! quadrature of the original integral.

pub mod checks;
pub mod oracle;

use std::collections::HashMap;

use num_complex::Complex64;

use crate::coefficient::{euclidean_norm, CertifiedCoefficient, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, CMatrix};

pub use checks::{form_difference_checks, FormDifferenceReport, FormDifferenceRow};
pub use oracle::{oracle_form_element, OracleValue};

/// Tolerance on the relative Hermitian defect of an assembled matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Lattice modes `n ∈ Z^d` with `|n|_∞ <= N`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct ModeSet {
    truncation: usize,
    dimension: usize,
    modes: Vec<Vec<i32>>,
    index: HashMap<Vec<i32>, usize>,
}

impl ModeSet {
    pub fn new(dimension: usize, truncation: usize) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {dimension}"
            )));
        }
        if truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be positive".into()));
        }
        let n = truncation as i32;
        let side = 2 * truncation + 1;
        let mut modes = Vec::with_capacity(side.pow(dimension as u32));
        let mut current = vec![-n; dimension];
        loop {
            modes.push(current.clone());
            // Odometer increment, last coordinate fastest.
            let mut pos = dimension;
            loop {
                if pos == 0 {
                    let index = modes.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
                    return Ok(Self {
                        truncation,
                        dimension,
                        modes,
                        index,
                    });
                }
                pos -= 1;
                if current[pos] < n {
                    current[pos] += 1;
                    break;
                }
                current[pos] = -n;
            }
        }
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Vec<i32>] {
        &self.modes
    }

    pub fn position(&self, mode: &[i32]) -> Option<usize> {
        self.index.get(mode).copied()
    }

    /// Position of the constant mode.
    pub fn zero_position(&self) -> usize {
        (self.modes.len() - 1) / 2
    }

    /// Position of `-n` for the mode at position `i`.
    pub fn negated_position(&self, i: usize) -> usize {
        self.modes.len() - 1 - i
    }
}

/// Truncated fiber matrix at one quasimomentum.
#[derive(Debug, Clone)]
pub struct FiberMatrix {
    pub xi: Vec<f64>,
    pub alpha: f64,
    pub c0: f64,
    pub entries: CMatrix,
}

/// Diagonal fiber matrix `mu0 c0 |2πn + ξ|^α` of the effective operator.
#[derive(Debug, Clone)]
pub struct EffectiveFiberMatrix {
    pub xi: Vec<f64>,
    pub diagonal: Vec<f64>,
}

impl EffectiveFiberMatrix {
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.diagonal.len();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(self.diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

fn check_xi(xi: &[f64], dimension: usize) -> Result<()> {
    if xi.len() != dimension {
        return Err(Error::InvalidParameter(format!(
            "quasimomentum has {} components, expected {dimension}",
            xi.len()
        )));
    }
    if xi.iter().any(|x| !x.is_finite() || x.abs() > std::f64::consts::PI) {
        return Err(Error::InvalidParameter(format!(
            "quasimomentum {xi:?} is outside the cell [-π, π]^d"
        )));
    }
    Ok(())
}

/// `|2π n + ξ|` for integer `n`.
fn shifted_norm(n: impl Iterator<Item = i32>, xi: &[f64]) -> f64 {
    n.zip(xi)
        .map(|(c, x)| {
            let v = 2.0 * std::f64::consts::PI * c as f64 + x;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Assembles the fiber matrix on `modes` at quasimomentum `xi`.
pub fn assemble_fiber_matrix(
    coeff: &CertifiedCoefficient,
    params: &ModelParams,
    c0: f64,
    modes: &ModeSet,
    xi: &[f64],
) -> Result<FiberMatrix> {
    let d = params.dimension();
    if coeff.dimension() != d || modes.dimension() != d {
        return Err(Error::InvalidParameter(
            "coefficient, modes and parameters disagree on dimension".into(),
        ));
    }
    check_xi(xi, d)?;
    let required = coeff.coefficient().coupling_extent();
    if (modes.truncation() as i32) < required {
        return Err(Error::TruncationTooSmall {
            truncation: modes.truncation(),
            required: required as usize,
        });
    }
    let alpha = params.alpha();
    let zero_xi = vec![0.0; d];
    let pw = |v: f64| if v == 0.0 { 0.0 } else { v.powf(alpha) };
    let support: Vec<(&Vec<i32>, &Vec<i32>, Complex64, Vec<i32>, f64, f64)> = coeff
        .coefficient()
        .modes()
        .iter()
        .map(|((k, l), v)| {
            let s: Vec<i32> = k.iter().zip(l).map(|(a, b)| a + b).collect();
            let l_pow = pw(shifted_norm(l.iter().copied(), &zero_xi));
            let k_pow = pw(shifted_norm(k.iter().copied(), &zero_xi));
            (k, l, *v, s, l_pow, k_pow)
        })
        .collect();

    let size = modes.len();
    let mut entries = CMatrix::zeros(size, size);
    let neg_xi: Vec<f64> = xi.iter().map(|x| -x).collect();
    let mut n_buf = vec![0i32; d];
    for (i, m) in modes.modes().iter().enumerate() {
        for (_, l, value, s, l_pow, k_pow) in &support {
            for c in 0..d {
                n_buf[c] = m[c] - s[c];
            }
            let Some(j) = modes.position(&n_buf) else { continue };
            let a2 = pw(shifted_norm(l.iter().zip(&n_buf).map(|(a, b)| a + b), xi));
            let a3 = pw(shifted_norm(l.iter().zip(m).map(|(a, b)| a - b), &neg_xi));
            // Paired so that each bracket vanishes identically on the constant
            // mode at ξ = 0.
            let bracket = (a2 - l_pow) + (a3 - k_pow);
            entries[(i, j)] += value * bracket;
        }
    }
    entries *= Complex64::new(c0 / 2.0, 0.0);

    let defect = hermitian_defect(&entries);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(FiberMatrix {
        xi: xi.to_vec(),
        alpha,
        c0,
        entries,
    })
}

/// Diagonal fiber of the effective operator `mu0 c0 (-Δ)^(α/2)`.
pub fn assemble_effective_fiber(
    params: &ModelParams,
    c0: f64,
    mu_eff: f64,
    modes: &ModeSet,
    xi: &[f64],
) -> Result<EffectiveFiberMatrix> {
    check_xi(xi, params.dimension())?;
    let alpha = params.alpha();
    let scale = mu_eff * c0;
    let diagonal = modes
        .modes()
        .iter()
        .map(|n| {
            let r = shifted_norm(n.iter().copied(), xi);
            if r == 0.0 {
                0.0
            } else {
                scale * r.powf(alpha)
            }
        })
        .collect();
    Ok(EffectiveFiberMatrix {
        xi: xi.to_vec(),
        diagonal,
    })
}

/// Value `rho(ξ)` of the fiber form on the constant function and its
/// deviation `rho_*(ξ) = rho(ξ) - mu0 c0 |ξ|^α`.
///
/// `rho_*` is summed directly from the modes `mu_hat[-l, l]`, `l ≠ 0`, in a
/// cancellation-free form, so it keeps relative accuracy as `ξ → 0`.
pub fn rho_and_rho_star(coeff: &CertifiedCoefficient, params: &ModelParams, c0: f64, xi: &[f64]) -> Result<(f64, f64)> {
    check_xi(xi, params.dimension())?;
    let alpha = params.alpha();
    let xi2: f64 = xi.iter().map(|x| x * x).sum();
    let mut rho_star = 0.0;
    for ((k, l), v) in coeff.coefficient().modes() {
        if l.iter().all(|&c| c == 0) || k.iter().zip(l).any(|(a, b)| a + b != 0) {
            continue;
        }
        let lv: Vec<f64> = l.iter().map(|&c| 2.0 * std::f64::consts::PI * c as f64).collect();
        let x2: f64 = lv.iter().map(|c| c * c).sum();
        let cross: f64 = 2.0 * lv.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
        let half = alpha / 2.0;
        // |2πl ± ξ|^α - |2πl|^α = |2πl|^α ((1 + u±)^(α/2) - 1).
        let plus = (half * ((cross + xi2) / x2).ln_1p()).exp_m1();
        let minus = (half * ((-cross + xi2) / x2).ln_1p()).exp_m1();
        rho_star += v.re * x2.powf(half) * (plus + minus);
    }
    rho_star *= c0 / 2.0;
    let mu_eff = crate::coefficient::effective_mu(coeff.coefficient())?;
    let norm = euclidean_norm(xi);
    let v = if norm == 0.0 { 0.0 } else { c0 * norm.powf(alpha) };
    Ok((mu_eff * v + rho_star, rho_star))
}
