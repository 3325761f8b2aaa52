//! One-dimensional quadrature: globally adaptive Gauss-Kronrod, Gauss-Legendre
//! rules, and integrals of the form `∫_0^∞ g(z) z^(-1-alpha) dz` with
//! oscillatory `g`.
//!
//! The power-kernel integrals back the independent checks on the closed-form
//! fiber entries and on `c0(d, alpha)`. They are split into three pieces:
//! a neighbourhood of the origin handled with the substitution `z = z1 t^4`
//! (which turns the `z^(1-alpha)` behaviour into a smooth integrand), a middle
//! range resolved adaptively on unit panels, and a tail beyond the cutoff `Z`
//! where each cosine is integrated after rotating the path into the upper
//! half plane.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value of an integral together with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// 15-point Kronrod rule on `[a, b]`, returning the Kronrod value and the
/// difference to the embedded 7-point Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss-Kronrod integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_panels: 20_000,
        }
    }
}

impl Adaptive {
    /// Integrate `f` over `[a, b]` starting from `initial` equal panels.
    ///
    /// Bisects the panel with the largest error estimate until the summed
    /// estimate meets the tolerance or the panel budget is exhausted; in the
    /// latter case the best available value is returned with its (large)
    /// error estimate so the caller can decide.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, initial: usize) -> QuadResult {
        let initial = initial.max(1);
        let width = (b - a) / initial as f64;
        let mut heap = BinaryHeap::with_capacity(initial * 2);
        for i in 0..initial {
            let lo = a + width * i as f64;
            let hi = if i + 1 == initial {
                b
            } else {
                a + width * (i + 1) as f64
            };
            let (value, error) = gk15(&f, lo, hi);
            heap.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        loop {
            let (total, err): (f64, f64) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) || heap.len() >= self.max_panels {
                // Summation in a fixed order keeps the result independent of heap layout.
                let mut panels = heap.into_vec();
                panels.sort_by(|p, q| p.a.total_cmp(&q.a));
                let value = panels.iter().map(|p| p.value).sum();
                let error = panels.iter().map(|p| p.error).sum();
                return QuadResult { value, error };
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
                let (value, error) = gk15(&f, lo, hi);
                heap.push(Panel {
                    a: lo,
                    b: hi,
                    value,
                    error,
                });
            }
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Settings for [`cosine_power_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerQuadConfig {
    /// End of the substituted neighbourhood of the origin.
    pub inner_radius: f64,
    /// Start of the analytically rotated tail.
    pub outer_cutoff: f64,
    /// Requested relative tolerance.
    pub rel_tol: f64,
    /// Requested absolute tolerance.
    pub abs_tol: f64,
}

impl Default for PowerQuadConfig {
    fn default() -> Self {
        Self {
            inner_radius: 1.0,
            outer_cutoff: 64.0,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

/// `∫_Z^∞ cos(a z) z^(-1-alpha) dz`.
///
/// For `a = 0` this is `Z^(-alpha)/alpha`. Otherwise the path is rotated to
/// `z = Z + i t/|a|`, where the integrand decays like `exp(-t)`.
pub fn cosine_tail(freq: f64, alpha: f64, cutoff: f64) -> f64 {
    if freq == 0.0 {
        return cutoff.powf(-alpha) / alpha;
    }
    let b = freq.abs();
    let quad = Adaptive {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_panels: 2000,
    };
    let kernel = |t: f64| (-t).exp() * Complex64::new(cutoff, t / b).powf(-1.0 - alpha);
    let re = quad.integrate(|t| kernel(t).re, 0.0, 60.0, 8).value;
    let im = quad.integrate(|t| kernel(t).im, 0.0, 60.0, 8).value;
    let phase = Complex64::new(0.0, b * cutoff).exp();
    (Complex64::new(0.0, 1.0 / b) * phase * Complex64::new(re, im)).re
}

/// `∫_0^Z g(z) z^(-1-alpha) dz` for `g(z) = O(z^2)` at the origin.
///
/// `[0, inner_radius]` is mapped by `z = inner_radius t^4`; `[inner_radius, Z]`
/// starts from `panels` equal pieces so oscillations are resolved up front.
pub fn power_kernel_integral<G: Fn(f64) -> f64>(
    g: G,
    alpha: f64,
    inner_radius: f64,
    cutoff: f64,
    panels: usize,
    quad: &Adaptive,
) -> QuadResult {
    let z1 = inner_radius;
    let inner = quad.integrate(
        |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let t3 = t * t * t;
            let z = z1 * t3 * t;
            g(z) * z.powf(-1.0 - alpha) * 4.0 * z1 * t3
        },
        0.0,
        1.0,
        4,
    );
    let middle = quad.integrate(|z| g(z) * z.powf(-1.0 - alpha), z1, cutoff, panels);
    QuadResult {
        value: inner.value + middle.value,
        error: inner.error + middle.error,
    }
}

fn cosine_power_integral_once(terms: &[(f64, f64)], alpha: f64, cfg: &PowerQuadConfig) -> QuadResult {
    let quad = Adaptive {
        abs_tol: cfg.abs_tol * 0.1,
        rel_tol: cfg.rel_tol * 0.1,
        max_panels: 50_000,
    };
    // Σ w cos(a z) = -2 Σ w sin^2(a z / 2) when Σ w = 0; the right side keeps
    // full relative precision for small z.
    let g = |z: f64| -> f64 {
        -2.0 * terms
            .iter()
            .map(|&(a, w)| {
                let s = (0.5 * a * z).sin();
                w * s * s
            })
            .sum::<f64>()
    };
    let z_max = cfg.outer_cutoff;
    let max_freq = terms.iter().fold(0.0_f64, |m, &(a, _)| m.max(a.abs()));
    let panels = (((z_max - cfg.inner_radius) * (1.0 + max_freq / std::f64::consts::PI)).ceil() as usize).max(1);
    let body = power_kernel_integral(g, alpha, cfg.inner_radius, z_max, panels, &quad);
    let tail: f64 = terms.iter().map(|&(a, w)| w * cosine_tail(a, alpha, z_max)).sum();
    QuadResult {
        value: body.value + tail,
        error: body.error,
    }
}

/// `∫_0^∞ Σ_j w_j cos(a_j z) z^(-1-alpha) dz` for weights summing to zero.
///
/// The computation is repeated with the tail cutoff doubled; the two values
/// must agree to the requested tolerance.
pub fn cosine_power_integral(terms: &[(f64, f64)], alpha: f64, cfg: &PowerQuadConfig) -> Result<QuadResult> {
    let weight_sum: f64 = terms.iter().map(|t| t.1).sum();
    let weight_scale: f64 = terms.iter().map(|t| t.1.abs()).sum();
    if weight_sum.abs() > 1e-12 * weight_scale.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "cosine weights must sum to zero (sum = {weight_sum:e})"
        )));
    }
    let coarse = cosine_power_integral_once(terms, alpha, cfg);
    let refined_cfg = PowerQuadConfig {
        outer_cutoff: 2.0 * cfg.outer_cutoff,
        ..*cfg
    };
    let fine = cosine_power_integral_once(terms, alpha, &refined_cfg);
    let change = (fine.value - coarse.value).abs();
    // Each term is of size |a|^alpha; the sum may cancel to nearly zero.
    let term_scale: f64 = terms.iter().map(|&(a, w)| w.abs() * a.abs().powf(alpha)).sum();
    let tolerance = cfg.abs_tol.max(cfg.rel_tol * fine.value.abs().max(term_scale));
    let error = change + fine.error;
    if error > tolerance {
        return Err(Error::QuadratureNotConverged {
            change: error,
            tolerance,
        });
    }
    Ok(QuadResult {
        value: fine.value,
        error,
    })
}
