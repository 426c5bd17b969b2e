//! Interpolating sequences in `B_n`: the ratio condition, separation
//! products, explicit bounded interpolants and the triangular-array witness
//! that obstructs Cesàro convergence when `‖φ_j‖_∞` stays at 1.

mod interpolants;
mod sequence;
mod triangular;

pub use interpolants::{build_interpolants, Interpolants, MIN_SEPARATION};
pub use sequence::{ratio_condition, separation_products, NodeSequence, RatioCheck, SeparationProducts, DISTINCT_TOL};
pub use triangular::{
    build_triangular_array, witness_function, TriangularArray, WitnessFunction, WitnessReport, ANCHOR_BAND, MERGE_TOL,
};

use crate::dynamics::DynamicsError;
use crate::ergodicity::ErgodicityError;
use crate::geometry::GeometryError;
use crate::linalg::LinalgError;
use crate::maps::MapError;

#[derive(Debug, thiserror::Error)]
pub enum InterpolationError {
    #[error("empty node sequence")]
    Empty,
    #[error("nodes {0} and {1} coincide")]
    DegenerateNodes(usize, usize),
    #[error("node {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("separation constant {0:e} is below {MIN_SEPARATION:e}")]
    SeparationTooSmall(f64),
    #[error("map has a contracting iterate: ||phi_{n0}|| <= {sup}")]
    MapContracts { n0: usize, sup: f64 },
    #[error("no anchor with |phi_j(a)| >= eps found on the grid for row {row}")]
    SearchExhausted { row: usize },
    #[error("nodes violate the ratio condition at index {index}: ratio {ratio} >= {bound}")]
    RatioViolated { index: usize, ratio: f64, bound: f64 },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("node file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ergodicity(#[from] ErgodicityError),
}
