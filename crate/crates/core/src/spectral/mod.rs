//! Eigen-analysis of fiber matrices and the threshold spectral projector.
//!
//! The projector onto the bottom eigenvalue is computed twice: from the
//! eigendecomposition ([`projector_by_eig`]) and from a Riesz contour
//! integral around `[0, d0/3]` ([`projector_by_riesz`]). The two routes share
//! no linear-algebra code beyond matrix assembly.

pub mod contour;
pub mod projector;
pub mod threshold;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fiber::{FiberMatrix, HERMITIAN_TOL};
use crate::linalg::{self, hermitian_defect, CMatrix};

pub use contour::{ContourRule, StadiumContour};
pub use projector::{projector_by_eig, projector_by_riesz, riesz_adaptive, RieszProjector, RieszSettings};
pub use threshold::{threshold_report, ThresholdOptions, ThresholdReport};

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralData {
    /// `max_j ‖A v_j - λ_j v_j‖`.
    pub fn residual(&self, a: &CMatrix) -> f64 {
        let av = a * &self.eigenvectors;
        (0..self.eigenvalues.len())
            .map(|j| {
                let col = av.column(j) - self.eigenvectors.column(j) * Complex64::new(self.eigenvalues[j], 0.0);
                col.norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V*V - I|` entrywise.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.eigenvalues.len();
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a fiber matrix.
pub fn eig_hermitian(matrix: &FiberMatrix) -> Result<SpectralData> {
    eig_matrix(&matrix.entries)
}

/// Same as [`eig_hermitian`] for a bare Hermitian matrix.
pub fn eig_matrix(m: &CMatrix) -> Result<SpectralData> {
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let (eigenvalues, eigenvectors) = linalg::eig_hermitian(m)?;
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
    })
}
