//! Stadium-shaped contour at distance `d0/3` around the segment `[0, d0/3]`.
//!
//! The curve consists of two straight pieces and two semicircles, so its
//! curvature jumps at four points. A uniform trapezoid rule therefore
//! converges only algebraically; the default rule places Gauss-Legendre
//! nodes on each smooth piece separately.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::gauss_legendre;

/// Quadrature rule along the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourRule {
    /// Gauss-Legendre nodes on each straight and circular piece.
    #[default]
    GaussLegendre,
    /// Equally spaced nodes in arclength.
    Trapezoid,
}

/// Quadrature point `ζ` with complex weight `w ≈ dζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub point: Complex64,
    pub weight: Complex64,
}

#[derive(Debug, Clone)]
pub struct StadiumContour {
    pub d0: f64,
    pub rule: ContourRule,
    pub nodes: Vec<ContourNode>,
}

/// Position and unit tangent at arclength `s` along the counterclockwise
/// stadium, starting from `-ir` on the bottom edge.
fn point_at(s: f64, a: f64, r: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let arc = PI * r;
    if s < a {
        (Complex64::new(s, -r), Complex64::new(1.0, 0.0))
    } else if s < a + arc {
        let theta = -PI / 2.0 + (s - a) / r;
        let e = Complex64::from_polar(1.0, theta);
        (Complex64::new(a, 0.0) + e * r, i * e)
    } else if s < 2.0 * a + arc {
        (Complex64::new(a - (s - a - arc), r), Complex64::new(-1.0, 0.0))
    } else {
        let theta = PI / 2.0 + (s - 2.0 * a - arc) / r;
        let e = Complex64::from_polar(1.0, theta);
        (e * r, i * e)
    }
}

impl StadiumContour {
    /// Contour for gap floor `d0` with about `nodes` quadrature points.
    pub fn new(d0: f64, nodes: usize, rule: ContourRule) -> Self {
        let a = d0 / 3.0;
        let r = d0 / 3.0;
        let length = 2.0 * a + 2.0 * PI * r;
        let nodes = nodes.max(8);
        let points = match rule {
            ContourRule::Trapezoid => {
                let h = length / nodes as f64;
                (0..nodes)
                    .map(|j| {
                        let (point, tangent) = point_at(h * j as f64, a, r);
                        ContourNode {
                            point,
                            weight: tangent * h,
                        }
                    })
                    .collect()
            }
            ContourRule::GaussLegendre => {
                // Pieces in traversal order: bottom, right arc, top, left arc.
                let lengths = [a, PI * r, a, PI * r];
                let mut counts: Vec<usize> = lengths
                    .iter()
                    .map(|l| ((l / length) * nodes as f64).round().max(2.0) as usize)
                    .collect();
                let assigned: usize = counts.iter().sum();
                if assigned != nodes && nodes > 8 {
                    // Put any rounding remainder on the arcs.
                    let diff = nodes as isize - assigned as isize;
                    counts[1] = (counts[1] as isize + diff / 2) as usize;
                    counts[3] = (counts[3] as isize + diff - diff / 2) as usize;
                }
                let mut out = Vec::with_capacity(nodes);
                let mut start = 0.0;
                for (len, count) in lengths.iter().zip(counts) {
                    let (x, w) = gauss_legendre(count);
                    for (xj, wj) in x.iter().zip(&w) {
                        let s = start + 0.5 * len * (xj + 1.0);
                        let (point, tangent) = point_at(s, a, r);
                        out.push(ContourNode {
                            point,
                            weight: tangent * (0.5 * len * wj),
                        });
                    }
                    start += len;
                }
                out
            }
        };
        Self {
            d0,
            rule,
            nodes: points,
        }
    }

    /// Half-width of the enclosed segment and radius of the caps.
    pub fn radius(&self) -> f64 {
        self.d0 / 3.0
    }

    /// Quadrature approximation of the arclength.
    pub fn arclength(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight.norm()).sum()
    }

    /// Exact arclength `d0 (2π + 2) / 3`.
    pub fn exact_arclength(&self) -> f64 {
        self.d0 * (2.0 * PI + 2.0) / 3.0
    }

    /// Rightmost real point of the curve, `2 d0 / 3`.
    pub fn rightmost_point(&self) -> f64 {
        2.0 * self.radius()
    }

    /// Distance from a real point to the curve.
    pub fn distance_to(&self, lambda: f64) -> f64 {
        let a = self.radius();
        let to_segment = if lambda < 0.0 {
            -lambda
        } else if lambda > a {
            lambda - a
        } else {
            0.0
        };
        (to_segment - self.radius()).abs()
    }
}
