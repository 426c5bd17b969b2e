//! Iteration dynamics of self-maps: interior fixed points and their spectra,
//! the limit period, the limit retraction, Denjoy-Wolff points and the
//! boundary dilation ratio.

mod boundary;
mod fixed;
mod retraction;

pub use boundary::{
    boundary_dilation_ratio, denjoy_wolff, DenjoyWolff, DilationRatio, DEFAULT_ETA, DILATION_MARGIN,
};
pub use fixed::{fixed_behavior, find_fixed_point, FixedBehavior, DEFAULT_NEWTON_BUDGET, DEFAULT_FIXED_TOL};
pub use retraction::{contracting_block_bound, estimate_retraction, RetractionEstimate, Trend};

use num_complex::Complex64;

use crate::geometry::GeometryError;
use crate::linalg::{LinalgError, SpectralReport};
use crate::maps::MapError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("no fixed point found and the orbit of 0 does not escape (best residual {residual:e})")]
    Inconclusive { residual: f64 },
    #[error("unit-modulus eigenvalue {0} is not a root of unity")]
    NonRootEigenvalue(Complex64),
    #[error("iterates still move by {delta:e} at the last step")]
    NotConverging { delta: f64 },
    #[error("orbit of 0 stays at norm {norm} < 1 - tol")]
    NotEscaping { norm: f64 },
    #[error("no sample lies in the region |z - ρ(z)| >= η")]
    EmptyRegion,
    #[error("limit period overflows")]
    PeriodOverflow,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple of the root-of-unity orders of the unit-modulus
/// eigenvalues; `1` when there are none.
pub fn limit_period(report: &SpectralReport) -> Result<u32, DynamicsError> {
    let mut k: u64 = 1;
    for &(lambda, order) in &report.unity_orders {
        let q = order.ok_or(DynamicsError::NonRootEigenvalue(lambda))? as u64;
        k = k / gcd(k, q) * q;
        if k > u32::MAX as u64 {
            return Err(DynamicsError::PeriodOverflow);
        }
    }
    Ok(k as u32)
}
