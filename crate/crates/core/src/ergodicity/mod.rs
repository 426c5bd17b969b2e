//! Cesàro means of composition operators sampled on a grid, quasi-compactness
//! certificates and the mean-ergodicity classifier.
//!
//! Operator norms are only ever bounded from below here: a gap measured on a
//! dictionary of test functions is a lower bound for `‖M_j(C_φ) - P‖`.
//! Verdicts that need an upper bound come from the structural branches, with
//! the traces as corroboration.

mod certificate;
mod cesaro;
mod classify;
mod dictionary;
mod lipschitz;
mod trace;

pub use certificate::{
    certificate_from_profiles, quasi_compact_certificate, sup_profiles, ProfileStatus, QuasiCompactCertificate,
    SupProfiles, DEFAULT_CERT_MARGIN,
};
pub use cesaro::{cesaro_apply, cesaro_gap, cesaro_gap_trace, power_bound_trace, LimitOperator};
pub use classify::{
    classify_mean_ergodic, classify_with, Branch, ClassifyOptions, ErgodicVerdict, Verdict, WitnessRow, DEFAULT_EPSILON,
    DEFAULT_J_MAX, DEFAULT_TOL, DEFAULT_WITNESS_ROWS,
};
pub use dictionary::{monomial_sup, DictionaryEntry, FunctionDictionary, InvolutionFactor, TestFunction};
pub use lipschitz::{bergman_pairs, lipschitz_ratio, random_polynomials, LipschitzReport};
pub use trace::{write_traces_csv, ConvergenceTrace, TraceError, TraceRow};

use crate::dynamics::DynamicsError;
use crate::geometry::GeometryError;
use crate::linalg::LinalgError;
use crate::maps::MapError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ErgodicityError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dictionary: {0}")]
    Dictionary(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
