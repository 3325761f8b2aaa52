//! Spectral projector onto the threshold eigenvalue, by eigenvectors and by
//! the Riesz formula `F = -(1/2πi) ∮ (A - ζ)^(-1) dζ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{ContourRule, StadiumContour};
use super::SpectralData;
use crate::error::{Error, Result};
use crate::linalg::{rank_one_projector, CMatrix};

/// Smallest allowed separation `λ2 - λ1` below the cutoff.
pub const TIE_TOLERANCE: f64 = 1e-8;

/// `v1 v1*` for the single eigenvalue at or below `cutoff`.
pub fn projector_by_eig(spectral: &SpectralData, cutoff: f64) -> Result<CMatrix> {
    let count = spectral.eigenvalues.iter().filter(|&&l| l <= cutoff).count();
    if count != 1 {
        return Err(Error::GapViolation { count, cutoff });
    }
    if spectral.eigenvalues.len() > 1 && spectral.eigenvalues[1] - spectral.eigenvalues[0] < TIE_TOLERANCE {
        return Err(Error::GapViolation { count: 2, cutoff });
    }
    Ok(rank_one_projector(&spectral.eigenvectors.column(0).into_owned()))
}

/// Riesz projector `F` and `A F` from one contour quadrature.
#[derive(Debug, Clone)]
pub struct RieszProjector {
    pub f: CMatrix,
    pub af: CMatrix,
    pub nodes: usize,
}

/// Riesz quadrature on a fixed contour.
///
/// `eigenvalues` are used only to verify that the spectrum keeps a distance
/// of at least `d0/30` from the curve.
pub fn projector_by_riesz(a: &CMatrix, eigenvalues: &[f64], contour: &StadiumContour) -> Result<RieszProjector> {
    let required = contour.d0 / 30.0;
    let distance = eigenvalues
        .iter()
        .map(|&l| contour.distance_to(l))
        .fold(f64::INFINITY, f64::min);
    if distance < required {
        return Err(Error::ContourTooClose { distance, required });
    }
    let n = a.nrows();
    let size = n;
    let terms: Vec<(CMatrix, Complex64, Complex64)> = contour
        .nodes
        .par_iter()
        .map(|node| {
            let shifted = a - CMatrix::identity(size, size) * node.point;
            let inverse = shifted.lu().try_inverse().ok_or(Error::ContourTooClose {
                distance: 0.0,
                required,
            })?;
            Ok((inverse, node.weight, node.point))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut f = CMatrix::zeros(n, n);
    let mut af = CMatrix::zeros(n, n);
    // Summed in node order so the result does not depend on scheduling.
    for (inverse, weight, point) in &terms {
        f += inverse * *weight;
        af += inverse * (*weight * *point);
    }
    let scale = Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI));
    // -(1/(2πi)) = i/(2π)
    f *= scale;
    af *= scale;
    Ok(RieszProjector {
        f,
        af,
        nodes: contour.nodes.len(),
    })
}

/// Node-doubling control for [`riesz_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszSettings {
    pub rule: ContourRule,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Largest accepted Frobenius change between successive doublings.
    pub tolerance: f64,
}

impl Default for RieszSettings {
    fn default() -> Self {
        Self {
            rule: ContourRule::GaussLegendre,
            min_nodes: 128,
            max_nodes: 8192,
            tolerance: 1e-9,
        }
    }
}

/// Riesz projector with the node count doubled until `F` changes by less
/// than the tolerance. The returned value is the finer of the last pair.
pub fn riesz_adaptive(a: &CMatrix, eigenvalues: &[f64], d0: f64, settings: &RieszSettings) -> Result<RieszProjector> {
    let mut nodes = settings.min_nodes.max(8);
    let mut previous = projector_by_riesz(a, eigenvalues, &StadiumContour::new(d0, nodes, settings.rule))?;
    loop {
        nodes *= 2;
        let next = projector_by_riesz(a, eigenvalues, &StadiumContour::new(d0, nodes, settings.rule))?;
        let change = (&next.f - &previous.f).norm();
        if change < settings.tolerance {
            return Ok(next);
        }
        if nodes >= settings.max_nodes {
            return Err(Error::QuadratureNotConverged {
                change,
                tolerance: settings.tolerance,
            });
        }
        previous = next;
    }
}
