//! Quasimomentum grids over the cell `[-π, π)^d`.

use std::collections::HashSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to build an [`XiGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiGridSpec {
    /// Uniform points per axis.
    pub points_per_dim: usize,
    /// Decimal exponent of the smallest refinement radius.
    pub radial_min_exp: f64,
    /// Decimal exponent of the largest refinement radius.
    pub radial_max_exp: f64,
    /// Number of log-spaced refinement radii.
    pub radial_count: usize,
    /// Include diagonal directions in the radial refinement.
    pub diagonals: bool,
    /// Also refine towards the cell boundary at `±(π - r)` on each axis.
    pub boundary: bool,
}

impl Default for XiGridSpec {
    fn default() -> Self {
        Self {
            points_per_dim: 64,
            radial_min_exp: -4.0,
            radial_max_exp: -0.5,
            radial_count: 15,
            diagonals: true,
            boundary: true,
        }
    }
}

impl XiGridSpec {
    /// The same spec with twice as many uniform points and radii.
    pub fn doubled(&self) -> Self {
        Self {
            points_per_dim: 2 * self.points_per_dim,
            radial_count: 2 * self.radial_count.max(1) - 1,
            ..self.clone()
        }
    }

    /// Log-spaced refinement radii.
    pub fn radii(&self) -> Vec<f64> {
        log_space(self.radial_min_exp, self.radial_max_exp, self.radial_count)
    }
}

/// `count` values `10^e` with `e` equally spaced from `min_exp` to `max_exp`.
pub fn log_space(min_exp: f64, max_exp: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(min_exp)],
        _ => (0..count)
            .map(|i| 10f64.powf(min_exp + (max_exp - min_exp) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// Ordered, duplicate-free list of quasimomenta in the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct XiGrid {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
}

impl XiGrid {
    pub fn new(dimension: usize, spec: &XiGridSpec) -> Result<Self> {
        if spec.points_per_dim == 0 {
            return Err(Error::InvalidParameter(
                "xi grid needs at least one uniform point per axis".into(),
            ));
        }
        if spec.radial_max_exp >= PI.log10() || spec.radial_min_exp > spec.radial_max_exp {
            return Err(Error::InvalidParameter(format!(
                "radial exponents must satisfy min <= max < log10(π), got [{}, {}]",
                spec.radial_min_exp, spec.radial_max_exp
            )));
        }
        let mut grid = Self {
            dimension,
            points: Vec::new(),
        };
        let mut seen = HashSet::new();
        let mut push = |grid: &mut Self, p: Vec<f64>| {
            let key: Vec<u64> = p.iter().map(|x| (x + 0.0).to_bits()).collect();
            if seen.insert(key) {
                grid.points.push(p);
            }
        };

        push(&mut grid, vec![0.0; dimension]);
        let axis: Vec<f64> = (0..spec.points_per_dim)
            .map(|i| -PI + 2.0 * PI * i as f64 / spec.points_per_dim as f64)
            .collect();
        let total = spec.points_per_dim.pow(dimension as u32);
        for flat in 0..total {
            let mut rest = flat;
            let mut p = vec![0.0; dimension];
            for slot in p.iter_mut().rev() {
                *slot = axis[rest % spec.points_per_dim];
                rest /= spec.points_per_dim;
            }
            push(&mut grid, p);
        }

        let directions = directions(dimension, spec.diagonals);
        let radii = spec.radii();
        for &r in &radii {
            for dir in &directions {
                push(&mut grid, dir.iter().map(|c| c * r).collect());
            }
        }
        if spec.boundary {
            for &r in &radii {
                for i in 0..dimension {
                    for sign in [1.0, -1.0] {
                        let mut p = vec![0.0; dimension];
                        p[i] = sign * (PI - r);
                        push(&mut grid, p);
                    }
                }
            }
        }
        Ok(grid)
    }

    /// Points with `|ξ| <= radius`, in grid order.
    pub fn within(&self, radius: f64) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .filter(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt() <= radius)
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Unit directions: `±e_i`, and if requested all `(±1, …, ±1)/√d`.
fn directions(dimension: usize, diagonals: bool) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..dimension {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; dimension];
            v[i] = sign;
            out.push(v);
        }
    }
    if diagonals && dimension > 1 {
        let scale = 1.0 / (dimension as f64).sqrt();
        for mask in 0..(1u32 << dimension) {
            out.push(
                (0..dimension)
                    .map(|i| if mask & (1 << i) == 0 { scale } else { -scale })
                    .collect(),
            );
        }
    }
    out
}
