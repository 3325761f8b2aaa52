//! Error type shared by every module of the crate.

use thiserror::Error;

/// Which symmetry of the coefficient's mode map failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    /// `mu(-k,-l) != conj(mu(k,l))`: the coefficient would not be real-valued.
    Conjugate,
    /// `mu(l,k) != mu(k,l)`: the coefficient would not satisfy `mu(x,y) = mu(y,x)`.
    Exchange,
}

impl std::fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryKind::Conjugate => f.write_str("conjugate"),
            SymmetryKind::Exchange => f.write_str("exchange"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{kind} symmetry violated at mode pair k={k:?}, l={l:?}")]
    SymmetryViolation {
        kind: SymmetryKind,
        k: Vec<i32>,
        l: Vec<i32>,
    },

    #[error("positivity not certified: certified lower bound is {certified_lower:.6e}")]
    PositivityUncertified { certified_lower: f64 },

    #[error("mean coefficient has imaginary part {imag:.3e}")]
    ComplexMean { imag: f64 },

    #[error("truncation N={truncation} is smaller than the coefficient support extent {required}")]
    TruncationTooSmall { truncation: usize, required: usize },

    #[error("quadrature did not converge: change {change:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNotConverged { change: f64, tolerance: f64 },

    #[error("Hermitian eigensolver failed to converge on a {size}x{size} matrix")]
    ConvergenceFailure { size: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("spectral gap violated: {count} eigenvalue(s) at or below {cutoff:.6e} (need exactly one, simple)")]
    GapViolation { count: usize, cutoff: f64 },

    #[error("spectrum within {distance:.3e} of the contour (required at least {required:.3e})")]
    ContourTooClose { distance: f64, required: f64 },

    #[error("|xi| = {xi_norm:.6e} lies outside the threshold ball of radius {delta0:.6e}")]
    OutsideThresholdBall { xi_norm: f64, delta0: f64 },

    #[error("spectral projector routes disagree by {difference:.3e} (tolerance {tolerance:.3e})")]
    ProjectorMismatch { difference: f64, tolerance: f64 },

    #[error("bound violated at |xi| = {xi_norm:.6e} (margin {margin:.3e})")]
    BoundViolated { xi_norm: f64, margin: f64 },

    #[error("truncation unstable: N -> 2N changes the discrepancy by {stability:.3e}")]
    TruncationUnstable { stability: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
