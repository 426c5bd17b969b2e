//! Small dense complex linear algebra.
//!
//! Everything here is sized for derivative matrices of self-maps of the unit
//! ball, so `n <= 16`. Algorithms are the textbook ones (Householder
//! Hessenberg reduction, single-shift complex QR, one-sided Jacobi SVD) with
//! tolerances chosen for double precision.

mod eigen;
mod matrix;
mod spectral;
mod svd;
pub mod vector;

pub use eigen::{eigenvalues, schur, Schur};
pub use matrix::{matrix_power, CMatrix, MAX_DIM};
pub use spectral::{
    contracting_block, root_of_unity_order, spectral_report, spectral_split, SpectralReport,
    Splitting, DEFAULT_MODULUS_TOL, DEFAULT_Q_MAX,
};
pub use svd::{singular_values, solve_least_squares, svd, Svd};

use num_complex::Complex64;

/// Errors raised by the linear-algebra kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix dimension {0} is outside the supported range 1..={MAX_DIM}")]
    InvalidDimension(usize),
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("iteration did not converge within {iterations} steps")]
    NonConvergence { iterations: usize },
    #[error("eigenvalue {eigenvalue} has modulus {modulus} too close to 1 to classify; adjust the tolerance")]
    AmbiguousModulus { eigenvalue: Complex64, modulus: f64 },
    #[error("eigenvalue {eigenvalue} has modulus {modulus} > 1")]
    SpectrumOutsideDisk { eigenvalue: Complex64, modulus: f64 },
    #[error("{value} has modulus {modulus}, not on the unit circle")]
    NotUnitModulus { value: Complex64, modulus: f64 },
}
