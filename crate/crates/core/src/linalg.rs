//! Dense complex matrix helpers shared by the fiber and spectral code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest entry of `|M - M*|`, relative to the largest entry of `|M|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut scale = 0.0_f64;
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(m[(i, j)].norm());
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

/// Ascending eigenvalues and matching unit eigenvectors (columns) of a
/// Hermitian matrix.
///
/// Diagonal input is handled exactly without iteration, so matrices that are
/// diagonal in the mode basis give bit-reproducible spectra.
pub fn eig_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)));
    let (values, vectors): (Vec<f64>, CMatrix) = if diagonal {
        let values = (0..n).map(|i| m[(i, i)].re).collect();
        (values, CMatrix::identity(n, n))
    } else {
        // Symmetrize so round-off in the lower triangle cannot bias the result.
        let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::ConvergenceFailure { size: n })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

/// Spectral norm of a Hermitian matrix: the largest eigenvalue modulus.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(sym
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

/// Largest singular value of a general matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Rank-one projector `v v*` for a unit vector.
pub fn rank_one_projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// `u* M u`, real part.
pub fn quadratic_form(m: &CMatrix, u: &CVector) -> f64 {
    (u.adjoint() * m * u)[(0, 0)].re
}
