//! Numerical workbench for Bloch-Floquet homogenization of periodic
//! Levy-type operators.
//!
//! The operator acts on `L2(R^d)` through the quadratic form
//!
//! ```text
//! a[u,u] = 1/2 ∫∫ mu(x,y) |u(x) - u(y)|^2 / |x - y|^(d+alpha) dx dy
//! ```
//!
//! with a `Z^d`-periodic, symmetric, positive jump coefficient `mu`. The
//! crate assembles the fiber operators `A(xi)` on a truncated Fourier basis
//! of the unit torus, extracts the threshold spectral data near the bottom
//! of the spectrum, and measures how fast the resolvent of the rescaled
//! operator approaches the resolvent of the constant-coefficient effective
//! operator.
//!
//! Module map:
//! - [`coefficient`]: band-limited coefficients, certification, scalar constants.
//! - [`fiber`]: Galerkin fiber matrices, quadrature oracle, form-difference checks.
//! - [`spectral`]: eigen-analysis, spectral projectors (eigenvector and contour routes), threshold reports.
//! - [`homogenization`]: resolvent comparisons, quasimomentum grids, rate studies and fits.
//! - [`cli`]: configuration, command drivers, CSV/JSON report emission.

pub mod cli;
pub mod coefficient;
pub mod error;
pub mod fiber;
pub mod homogenization;
pub mod linalg;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
