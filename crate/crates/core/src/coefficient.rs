//! The periodic jump coefficient `mu(x, y)` and the scalar constants built
//! from it.
//!
//! Coefficients are trigonometric polynomials on the doubled torus,
//! `mu(x, y) = Σ mu_hat[k, l] exp(2πi (k·x + l·y))`, with finitely many
//! modes. Before use they are certified: the mode map must be exactly
//! conjugate- and exchange-symmetric, and a sampled minimum minus a Lipschitz
//! margin must stay positive.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result, SymmetryKind};
use crate::quadrature::{self, Adaptive, PowerQuadConfig, QuadResult};

/// Dimension and order of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    dimension: usize,
    alpha: f64,
}

impl ModelParams {
    pub fn new(dimension: usize, alpha: f64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {dimension}"
            )));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 2), got {alpha}"
            )));
        }
        Ok(Self { dimension, alpha })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Order of the energy space, `alpha / 2`.
    pub fn gamma(&self) -> f64 {
        self.alpha / 2.0
    }
}

/// Index pair `(k, l)` of a coefficient mode.
pub type ModeIndex = (Vec<i32>, Vec<i32>);

/// Finite Fourier series of `mu(x, y)` on the doubled torus.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficient {
    dimension: usize,
    modes: BTreeMap<ModeIndex, Complex64>,
}

impl PeriodicCoefficient {
    /// Builds a coefficient from `(k, l, amplitude)` records. Duplicate
    /// indices and wrong index lengths are rejected; symmetry is checked
    /// later by [`validate_coefficient`].
    pub fn new(dimension: usize, entries: impl IntoIterator<Item = (Vec<i32>, Vec<i32>, Complex64)>) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {dimension}"
            )));
        }
        let mut modes = BTreeMap::new();
        for (k, l, value) in entries {
            if k.len() != dimension || l.len() != dimension {
                return Err(Error::InvalidParameter(format!(
                    "mode ({k:?}, {l:?}) does not have {dimension} components per index"
                )));
            }
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "mode ({k:?}, {l:?}) has a non-finite amplitude"
                )));
            }
            if modes.insert((k.clone(), l.clone()), value).is_some() {
                return Err(Error::InvalidParameter(format!("mode ({k:?}, {l:?}) is listed twice")));
            }
        }
        Ok(Self { dimension, modes })
    }

    /// `mu ≡ value`.
    pub fn constant(dimension: usize, value: f64) -> Self {
        let zero = vec![0; dimension];
        Self::new(dimension, [(zero.clone(), zero, Complex64::new(value, 0.0))]).expect("valid constant")
    }

    /// `mu = 1 + amplitude cos(2π (x_1 - y_1))`.
    pub fn difference_cosine(dimension: usize, amplitude: f64) -> Self {
        let zero = vec![0; dimension];
        let e1 = unit(dimension, 1);
        let neg = unit(dimension, -1);
        let half = Complex64::new(amplitude / 2.0, 0.0);
        Self::new(
            dimension,
            [
                (zero.clone(), zero, Complex64::new(1.0, 0.0)),
                (e1.clone(), neg.clone(), half),
                (neg, e1, half),
            ],
        )
        .expect("valid coefficient")
    }

    /// `mu = 1 + amplitude cos(2π x_1) cos(2π y_1)`.
    pub fn product_cosine(dimension: usize, amplitude: f64) -> Self {
        let zero = vec![0; dimension];
        let quarter = Complex64::new(amplitude / 4.0, 0.0);
        let mut entries = vec![(zero.clone(), zero, Complex64::new(1.0, 0.0))];
        for sk in [-1, 1] {
            for sl in [-1, 1] {
                entries.push((unit(dimension, sk), unit(dimension, sl), quarter));
            }
        }
        Self::new(dimension, entries).expect("valid coefficient")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn modes(&self) -> &BTreeMap<ModeIndex, Complex64> {
        &self.modes
    }

    /// Amplitude of mode `(k, l)`; absent modes are zero.
    pub fn amplitude(&self, k: &[i32], l: &[i32]) -> Complex64 {
        self.modes
            .get(&(k.to_vec(), l.to_vec()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest `|k + l|_∞` over the support: the bandwidth of the fiber matrix.
    pub fn coupling_extent(&self) -> i32 {
        self.modes
            .keys()
            .map(|(k, l)| k.iter().zip(l).map(|(a, b)| (a + b).abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// `Σ 2π (|k|_1 + |l|_1) |mu_hat[k, l]|`, a Lipschitz constant of `mu`
    /// with respect to the Euclidean norm on the doubled torus.
    pub fn lipschitz_constant(&self) -> f64 {
        self.modes
            .iter()
            .map(|((k, l), v)| {
                let order: i32 = k.iter().chain(l).map(|c| c.abs()).sum();
                2.0 * PI * order as f64 * v.norm()
            })
            .sum()
    }

    /// Point value `mu(x, y)` (real part of the series).
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|((k, l), v)| {
                let phase: f64 = 2.0 * PI * (dot(k, x) + dot(l, y));
                v.re * phase.cos() - v.im * phase.sin()
            })
            .sum()
    }
}

fn unit(dimension: usize, sign: i32) -> Vec<i32> {
    let mut v = vec![0; dimension];
    v[0] = sign;
    v
}

fn dot(k: &[i32], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
}

/// Certified bounds `mu_minus <= mu(x, y) <= mu_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub lipschitz: f64,
    pub margin: f64,
    pub grid_points_per_dim: usize,
}

/// A coefficient that passed [`validate_coefficient`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedCoefficient {
    coefficient: PeriodicCoefficient,
    certificate: Certificate,
}

impl CertifiedCoefficient {
    pub fn new(coefficient: PeriodicCoefficient, grid_points_per_dim: usize) -> Result<Self> {
        let certificate = validate_coefficient(&coefficient, grid_points_per_dim)?;
        Ok(Self {
            coefficient,
            certificate,
        })
    }

    /// Certifies with the default grid for the coefficient's dimension.
    pub fn with_default_grid(coefficient: PeriodicCoefficient) -> Result<Self> {
        let grid = default_positivity_grid(coefficient.dimension());
        Self::new(coefficient, grid)
    }

    pub fn coefficient(&self) -> &PeriodicCoefficient {
        &self.coefficient
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn mu_minus(&self) -> f64 {
        self.certificate.mu_minus
    }

    pub fn mu_plus(&self) -> f64 {
        self.certificate.mu_plus
    }

    pub fn dimension(&self) -> usize {
        self.coefficient.dimension
    }
}

/// Positivity grid used when none is configured.
pub fn default_positivity_grid(dimension: usize) -> usize {
    match dimension {
        1 => 256,
        2 => 64,
        _ => 24,
    }
}

/// Checks both symmetries exactly, samples `mu` on a uniform grid of the
/// doubled torus and certifies global bounds with a Lipschitz margin.
pub fn validate_coefficient(coeff: &PeriodicCoefficient, grid_points_per_dim: usize) -> Result<Certificate> {
    if grid_points_per_dim < 16 {
        return Err(Error::InvalidParameter(format!(
            "positivity grid needs at least 16 points per dimension, got {grid_points_per_dim}"
        )));
    }
    check_symmetry(coeff)?;

    let d = coeff.dimension;
    let g = grid_points_per_dim;
    let (grid_min, grid_max) = sample_extremes(coeff, g);
    let lipschitz = coeff.lipschitz_constant();
    let h = 1.0 / g as f64;
    let margin = lipschitz * h * (2.0 * d as f64).sqrt() / 2.0;
    let mu_minus = grid_min - margin;
    let mu_plus = grid_max + margin;
    if mu_minus <= 0.0 {
        return Err(Error::PositivityUncertified {
            certified_lower: mu_minus,
        });
    }
    Ok(Certificate {
        mu_minus,
        mu_plus,
        grid_min,
        grid_max,
        lipschitz,
        margin,
        grid_points_per_dim: g,
    })
}

fn check_symmetry(coeff: &PeriodicCoefficient) -> Result<()> {
    for ((k, l), v) in &coeff.modes {
        let nk: Vec<i32> = k.iter().map(|c| -c).collect();
        let nl: Vec<i32> = l.iter().map(|c| -c).collect();
        if coeff.amplitude(&nk, &nl) != v.conj() {
            return Err(Error::SymmetryViolation {
                kind: SymmetryKind::Conjugate,
                k: k.clone(),
                l: l.clone(),
            });
        }
        if coeff.amplitude(l, k) != *v {
            return Err(Error::SymmetryViolation {
                kind: SymmetryKind::Exchange,
                k: k.clone(),
                l: l.clone(),
            });
        }
    }
    Ok(())
}

/// Minimum and maximum of `mu` on the grid `{i/g}^(2d)`.
///
/// Phases are reduced to integers modulo `g` and read from a table, so the
/// sampled values do not depend on accumulated round-off.
fn sample_extremes(coeff: &PeriodicCoefficient, g: usize) -> (f64, f64) {
    use rayon::prelude::*;

    let d = coeff.dimension;
    let dims = 2 * d;
    let table: Vec<(f64, f64)> = (0..g)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / g as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let gi = g as i64;
    let modes: Vec<(Vec<i64>, f64, f64)> = coeff
        .modes
        .iter()
        .map(|((k, l), v)| {
            let w = k.iter().chain(l).map(|&c| (c as i64).rem_euclid(gi)).collect();
            (w, v.re, v.im)
        })
        .collect();
    let inner: usize = g.pow(dims as u32 - 1);
    (0..g)
        .into_par_iter()
        .map(|first| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut idx = vec![0usize; dims];
            idx[0] = first;
            for flat in 0..inner {
                let mut rest = flat;
                for slot in idx.iter_mut().skip(1).rev() {
                    *slot = rest % g;
                    rest /= g;
                }
                let value: f64 = modes
                    .iter()
                    .map(|(w, re, im)| {
                        let e: i64 = w.iter().zip(&idx).map(|(a, &b)| a * b as i64).sum();
                        let (c, s) = table[e.rem_euclid(gi) as usize];
                        re * c - im * s
                    })
                    .sum();
                lo = lo.min(value);
                hi = hi.max(value);
            }
            (lo, hi)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| {
            (a.min(lo), b.max(hi))
        })
}

/// Cell average `mu^0 = mu_hat[0, 0]` of the coefficient.
pub fn effective_mu(coeff: &PeriodicCoefficient) -> Result<f64> {
    let zero = vec![0; coeff.dimension];
    let mean = coeff.amplitude(&zero, &zero);
    if mean.im.abs() > 1e-12 {
        return Err(Error::ComplexMean { imag: mean.im });
    }
    Ok(mean.re)
}

/// Cosine coefficients `m ↦ mu_hat[m, -m]`, `m ≠ 0`, of the even function
/// `mu_*(z)` governing the correction to the threshold eigenvalue.
pub fn mu_star_coefficients(coeff: &PeriodicCoefficient) -> BTreeMap<Vec<i32>, f64> {
    coeff
        .modes
        .iter()
        .filter(|((k, l), _)| k.iter().any(|&c| c != 0) && k.iter().zip(l).all(|(a, b)| a + b == 0))
        .map(|((k, _), v)| (k.clone(), v.re))
        .collect()
}

/// `c0(d, alpha) = π^(d/2) |Γ(-alpha/2)| / (2^alpha Γ((d + alpha)/2))`, the
/// constant with `∫ (1 - cos(ξ·z)) |z|^(-d-alpha) dz = c0 |ξ|^alpha`.
pub fn compute_c0(params: &ModelParams) -> f64 {
    let a = params.alpha / 2.0;
    let d = params.dimension as f64;
    // |Γ(-a)| = Γ(1 - a) / a for 0 < a < 1.
    let abs_gamma = gamma(1.0 - a) / a;
    PI.powf(d / 2.0) * abs_gamma / (2.0_f64.powf(params.alpha) * gamma((d + params.alpha) / 2.0))
}

/// `c0(d, alpha)` by radial quadrature of the defining integral.
///
/// The angular average of `1 - cos(r ω_1)` is `2(1 - cos r)` for `d = 1`,
/// `2π (1 - J_0(r))` for `d = 2` and `4π (1 - sin r / r)` for `d = 3`.
pub fn c0_by_quadrature(params: &ModelParams) -> Result<QuadResult> {
    let alpha = params.alpha;
    match params.dimension {
        1 => {
            let cfg = PowerQuadConfig::default();
            let r = quadrature::cosine_power_integral(&[(0.0, 2.0), (1.0, -2.0)], alpha, &cfg)?;
            Ok(r)
        }
        d => {
            let quad = Adaptive {
                abs_tol: 1e-11,
                rel_tol: 1e-9,
                max_panels: 20_000,
            };
            let cutoff = 400.0;
            let (sphere, g): (f64, Box<dyn Fn(f64) -> f64>) = if d == 2 {
                (2.0 * PI, Box::new(|r: f64| 2.0 * PI * one_minus_bessel_j0(r)))
            } else {
                (4.0 * PI, Box::new(|r: f64| 4.0 * PI * one_minus_sinc(r)))
            };
            let body = quadrature::power_kernel_integral(g, alpha, 1.0, cutoff, cutoff.ceil() as usize, &quad);
            // Beyond the cutoff the angular factor is the sphere area plus
            // oscillations decaying at least like r^(-1/2).
            let tail = sphere * cutoff.powf(-alpha) / alpha;
            let neglected = sphere * cutoff.powf(-1.5 - alpha);
            Ok(QuadResult {
                value: body.value + tail,
                error: body.error + neglected,
            })
        }
    }
}

/// `1 - J_0(r)`, from the periodic trapezoid rule for
/// `J_0(r) = (1/2π) ∫ cos(r cos θ) dθ`, written as an average of
/// `2 sin^2(r cos θ / 2)` to avoid cancellation at small `r`.
fn one_minus_bessel_j0(r: f64) -> f64 {
    let m = (r.abs() as usize) + 32;
    let step = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let s = (0.5 * r * (step * j as f64).cos()).sin();
            2.0 * s * s
        })
        .sum::<f64>()
        / m as f64
}

fn one_minus_sinc(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        r2 / 6.0 - r2 * r2 / 120.0
    } else {
        1.0 - r.sin() / r
    }
}

/// Constant `c1(d, alpha)` bounding the kernel of the fiber form difference,
/// `‖A(ξ) - A(0)‖ <= mu_plus c1 |ξ|^alpha` for `alpha < 1`.
///
/// The one-dimensional value `4 ∫_0^∞ |sin(z/2)| z^(-1-alpha) dz` is
/// integrated numerically on panels between the kinks at `2πj`; higher
/// dimensions follow from the spherical average of `|ω_1|^alpha`.
pub fn c1_by_quadrature(params: &ModelParams) -> Result<f64> {
    let alpha = params.alpha;
    if alpha >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "the form-difference constant is finite only for alpha < 1, got {alpha}"
        )));
    }
    let quad = Adaptive {
        abs_tol: 1e-11,
        rel_tol: 1e-10,
        max_panels: 50_000,
    };
    let periods = 2000usize;
    let cutoff = 2.0 * PI * periods as f64;
    let body = quadrature::power_kernel_integral(
        |z: f64| (0.5 * z).sin().abs(),
        alpha,
        2.0 * PI,
        cutoff,
        periods - 1,
        &quad,
    );
    // |sin(z/2)| = 2/π - (4/π) Σ_j cos(j z) / (4j^2 - 1).
    let mut tail = (2.0 / PI) * cutoff.powf(-alpha) / alpha;
    for j in 1..=8 {
        let jf = j as f64;
        tail -= (4.0 / PI) * quadrature::cosine_tail(jf, alpha, cutoff) / (4.0 * jf * jf - 1.0);
    }
    let one_dim = 4.0 * (body.value + tail);
    let d = params.dimension as f64;
    Ok(one_dim * PI.powf((d - 1.0) / 2.0) * gamma((alpha + 1.0) / 2.0) / gamma((d + alpha) / 2.0))
}

/// `V_alpha(ξ) = c0 |ξ|^alpha`, the symbol of `c0 (-Δ)^(alpha/2)`.
pub fn v_alpha(params: &ModelParams, c0: f64, xi: &[f64]) -> f64 {
    c0 * euclidean_norm(xi).powf(params.alpha)
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Modulus controlling threshold approximation errors:
/// `r^alpha` for `alpha < 1`, `r (1 + |ln r|)` for `alpha = 1`, `r` above.
pub fn theta(alpha: f64, r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else if alpha < 1.0 {
        r.powf(alpha)
    } else if alpha == 1.0 {
        r * (1.0 + r.ln().abs())
    } else {
        r
    }
}

/// Threshold radius `δ0 = π (mu_minus / (3 mu_plus))^(1/alpha)` and gap floor
/// `d0 = mu_minus c0 π^alpha`.
pub fn delta0_and_d0(params: &ModelParams, c0: f64, cert: &Certificate) -> (f64, f64) {
    let delta0 = PI * (cert.mu_minus / (3.0 * cert.mu_plus)).powf(1.0 / params.alpha);
    let d0 = cert.mu_minus * c0 * PI.powf(params.alpha);
    assert!(delta0 < PI, "threshold radius {delta0} must be below π");
    (delta0, d0)
}

/// Scalar constants shared by the threshold and rate computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub alpha: f64,
    pub c0: f64,
    pub mu_eff: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub d0: f64,
    pub delta0: f64,
}

impl TheoryConstants {
    pub fn new(params: &ModelParams, coeff: &CertifiedCoefficient) -> Result<Self> {
        let c0 = compute_c0(params);
        let mu_eff = effective_mu(coeff.coefficient())?;
        let (delta0, d0) = delta0_and_d0(params, c0, coeff.certificate());
        Ok(Self {
            alpha: params.alpha,
            c0,
            mu_eff,
            mu_minus: coeff.mu_minus(),
            mu_plus: coeff.mu_plus(),
            d0,
            delta0,
        })
    }

    pub fn theta(&self, r: f64) -> f64 {
        theta(self.alpha, r)
    }
}

/// Random real, exchange-symmetric coefficient with mean one.
///
/// Modes are drawn with `|k|_∞, |l|_∞ <= extent` and grouped into symmetry
/// orbits `{(k,l), (l,k), (-k,-l), (-l,-k)}`; the off-mean amplitudes sum to
/// at most `budget` in absolute value, so `budget < 1` guarantees positivity.
pub fn random_band_limited<R: Rng + ?Sized>(
    rng: &mut R,
    dimension: usize,
    extent: i32,
    orbits: usize,
    budget: f64,
) -> PeriodicCoefficient {
    let zero = vec![0; dimension];
    let mut modes: BTreeMap<ModeIndex, Complex64> = BTreeMap::new();
    modes.insert((zero.clone(), zero), Complex64::new(1.0, 0.0));
    let mut drawn = Vec::new();
    for _ in 0..orbits {
        let k: Vec<i32> = (0..dimension).map(|_| rng.gen_range(-extent..=extent)).collect();
        let l: Vec<i32> = (0..dimension).map(|_| rng.gen_range(-extent..=extent)).collect();
        if k.iter().chain(&l).all(|&c| c == 0) {
            continue;
        }
        let value = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        drawn.push((k, l, value));
    }
    for (k, l, value) in drawn {
        let nk: Vec<i32> = k.iter().map(|c| -c).collect();
        let nl: Vec<i32> = l.iter().map(|c| -c).collect();
        let orbit = [
            (k.clone(), l.clone(), false),
            (l.clone(), k.clone(), false),
            (nk.clone(), nl.clone(), true),
            (nl, nk, true),
        ];
        // If (k,l) is equivalent to its own negation the amplitude must be real.
        let self_conjugate = orbit.iter().any(|(a, b, negated)| *negated && *a == k && *b == l);
        let base = if self_conjugate {
            Complex64::new(value.re, 0.0)
        } else {
            value
        };
        for (a, b, negated) in orbit {
            let v = if negated { base.conj() } else { base };
            modes.insert((a, b), v);
        }
    }
    let off_mean: f64 = modes
        .iter()
        .filter(|((k, l), _)| k.iter().chain(l).any(|&c| c != 0))
        .map(|(_, v)| v.norm())
        .sum();
    if off_mean > 0.0 {
        let scale = budget / off_mean;
        for ((k, l), v) in modes.iter_mut() {
            if k.iter().chain(l).any(|&c| c != 0) {
                *v *= scale;
            }
        }
    }
    PeriodicCoefficient { dimension, modes }
}
