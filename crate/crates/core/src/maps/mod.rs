//! Symbolic holomorphic self-maps of the unit ball.
//!
//! A [`HoloMap`] is a closed description (linear, unitary, involution,
//! Möbius, coordinate monomial, composite) that can be evaluated,
//! differentiated and iterated without user code.

mod format;
mod grid;
mod iterate;
mod validate;

pub use format::{MapDescription, MonomialDescription};
pub use grid::{GridSpec, DEFAULT_DIRECTIONS, DEFAULT_LEVELS};
pub use iterate::{iterate, orbit, sup_norm_deviation, PowerCache};
pub use validate::{validate_self_map, SelfMapCertificate};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{involution_raw, GeometryError, Point};
use crate::linalg::vector::{inner, norm, norm_sqr};
use crate::linalg::{singular_values, CMatrix, LinalgError};

/// Slack on `δ_1 <= 1` for linear maps.
pub const LINEAR_NORM_SLACK: f64 = 1e-12;
/// Tolerance on `U* U = I` for unitary factors.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on `|φ(a) - a|` accepted as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-8;
/// Smallest distance to the sphere at which finite differences are taken.
pub const MIN_BOUNDARY_MARGIN: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("map value has norm {norm} >= 1")]
    NotSelfMap { norm: f64 },
    #[error("self-map violation at {point:?}: |φ(z)| = {norm}")]
    Violation { point: Vec<Complex64>, norm: f64 },
    #[error("finite-difference step underflows: 1 - |z| = {margin:e}")]
    StepUnderflow { margin: f64 },
    #[error("point is not fixed: |φ(a) - a| = {residual:e}")]
    NotFixedPoint { residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid map description: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One output coordinate `coeff * z_1^{p_1} ... z_n^{p_n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialTerm {
    pub coeff: Complex64,
    pub exponents: Vec<u64>,
}

impl MonomialTerm {
    pub fn new(coeff: Complex64, exponents: Vec<u64>) -> Self {
        Self { coeff, exponents }
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        if self.coeff == ZERO {
            return ZERO;
        }
        self.exponents
            .iter()
            .zip(z)
            .fold(self.coeff, |acc, (&p, &zk)| acc * cpow(zk, p))
    }
}

/// `z^p` by binary exponentiation; `z^0 = 1`.
pub(crate) fn cpow(z: Complex64, mut p: u64) -> Complex64 {
    let mut result = ONE;
    let mut base = z;
    while p > 0 {
        if p & 1 == 1 {
            result *= base;
        }
        p >>= 1;
        if p > 0 {
            base *= base;
        }
    }
    result
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDescription", into = "MapDescription")]
pub enum HoloMap {
    Linear(CMatrix),
    Unitary(CMatrix),
    /// `φ_a`, with `φ_0 = -id`.
    Involution(Point),
    /// `U ∘ φ_a`.
    Mobius { u: CMatrix, a: Point },
    Monomial(Vec<MonomialTerm>),
    /// Factors applied right to left: `[f, g]` is `f ∘ g`.
    Composite(Vec<HoloMap>),
}

impl HoloMap {
    /// Linear map `z ↦ A z`; requires `δ_1(A) <= 1`.
    pub fn linear(a: CMatrix) -> Result<Self, MapError> {
        let delta1 = singular_values(&a)?[0];
        if delta1 > 1.0 + LINEAR_NORM_SLACK {
            return Err(MapError::Invalid(format!(
                "linear map has largest singular value {delta1} > 1"
            )));
        }
        Ok(Self::Linear(a))
    }

    pub fn unitary(u: CMatrix) -> Result<Self, MapError> {
        check_unitary(&u)?;
        Ok(Self::Unitary(u))
    }

    pub fn involution(a: Point) -> Self {
        Self::Involution(a)
    }

    pub fn mobius(u: CMatrix, a: Point) -> Result<Self, MapError> {
        check_unitary(&u)?;
        if u.dim() != a.dim() {
            return Err(MapError::DimensionMismatch {
                expected: u.dim(),
                found: a.dim(),
            });
        }
        Ok(Self::Mobius { u, a })
    }

    /// Coordinate monomial map. Only the shape is checked here; whether it
    /// maps the ball into itself is decided by [`validate_self_map`].
    pub fn monomial(terms: Vec<MonomialTerm>) -> Result<Self, MapError> {
        let n = terms.len();
        if n == 0 {
            return Err(MapError::Invalid("monomial map has no coordinates".into()));
        }
        for t in &terms {
            if t.exponents.len() != n {
                return Err(MapError::DimensionMismatch {
                    expected: n,
                    found: t.exponents.len(),
                });
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(MapError::Invalid("non-finite monomial coefficient".into()));
            }
        }
        Ok(Self::Monomial(terms))
    }

    pub fn composite(factors: Vec<HoloMap>) -> Result<Self, MapError> {
        let Some(first) = factors.first() else {
            return Err(MapError::Invalid("composite map has no factors".into()));
        };
        let n = first.dim();
        for f in &factors {
            if f.dim() != n {
                return Err(MapError::DimensionMismatch {
                    expected: n,
                    found: f.dim(),
                });
            }
        }
        Ok(Self::Composite(factors))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Linear(m) | Self::Unitary(m) => m.dim(),
            Self::Involution(a) => a.dim(),
            Self::Mobius { a, .. } => a.dim(),
            Self::Monomial(t) => t.len(),
            Self::Composite(f) => f[0].dim(),
        }
    }

    /// Structural automorphism test: unitary, involution and Möbius factors,
    /// and linear maps whose matrix is unitary.
    pub fn is_automorphism(&self) -> bool {
        match self {
            Self::Unitary(_) | Self::Involution(_) | Self::Mobius { .. } => true,
            Self::Linear(m) => m.is_unitary(UNITARY_TOL),
            Self::Monomial(_) => false,
            Self::Composite(f) => f.iter().all(HoloMap::is_automorphism),
        }
    }

    /// `φ(z)` without the interior check on the result. Valid wherever the
    /// defining formula is.
    pub fn evaluate_raw(&self, z: &[Complex64]) -> Result<Vec<Complex64>, MapError> {
        if z.len() != self.dim() {
            return Err(MapError::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(match self {
            Self::Linear(m) | Self::Unitary(m) => m.mul_vec(z),
            Self::Involution(a) => involution_raw(a.coords(), z)?,
            Self::Mobius { u, a } => u.mul_vec(&involution_raw(a.coords(), z)?),
            Self::Monomial(terms) => terms.iter().map(|t| t.eval(z)).collect(),
            Self::Composite(factors) => {
                let mut w = z.to_vec();
                for f in factors.iter().rev() {
                    w = f.evaluate_raw(&w)?;
                }
                w
            }
        })
    }

    pub fn evaluate(&self, z: &Point) -> Result<Point, MapError> {
        let w = self.evaluate_raw(z.coords())?;
        let n = norm(&w);
        if !(n < 1.0) {
            return Err(MapError::NotSelfMap { norm: n });
        }
        Ok(Point::new(w)?)
    }

    /// Complex Jacobian `d_z φ`.
    pub fn derivative_at(&self, z: &Point) -> Result<CMatrix, MapError> {
        self.derivative_raw(z.coords())
    }

    fn derivative_raw(&self, z: &[Complex64]) -> Result<CMatrix, MapError> {
        match self {
            Self::Linear(m) | Self::Unitary(m) => Ok(m.clone()),
            Self::Involution(a) => involution_derivative(a.coords(), z),
            Self::Mobius { u, a } => Ok(u.mul(&involution_derivative(a.coords(), z)?)),
            Self::Monomial(_) => self.finite_difference_jacobian(z),
            Self::Composite(factors) => {
                let n = self.dim();
                let mut w = z.to_vec();
                let mut jac = CMatrix::identity(n);
                for f in factors.iter().rev() {
                    jac = f.derivative_raw(&w)?.mul(&jac);
                    w = f.evaluate_raw(&w)?;
                }
                Ok(jac)
            }
        }
    }

    /// Central differences along both real directions of every coordinate,
    /// combined into the holomorphic derivative `½(∂_x - i ∂_y)`.
    fn finite_difference_jacobian(&self, z: &[Complex64]) -> Result<CMatrix, MapError> {
        let margin = 1.0 - norm(z);
        if margin < MIN_BOUNDARY_MARGIN {
            return Err(MapError::StepUnderflow { margin });
        }
        let h = 1e-5 * margin;
        let n = z.len();
        let mut jac = CMatrix::zeros(n);
        for k in 0..n {
            let central = |step: Complex64| -> Result<Vec<Complex64>, MapError> {
                let mut plus = z.to_vec();
                let mut minus = z.to_vec();
                plus[k] += step;
                minus[k] -= step;
                let fp = self.evaluate_raw(&plus)?;
                let fm = self.evaluate_raw(&minus)?;
                Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            };
            let dx = central(Complex64::new(h, 0.0))?;
            let dy = central(Complex64::new(0.0, h))?;
            for i in 0..n {
                jac[(i, k)] = (dx[i] - Complex64::i() * dy[i]) * 0.5;
            }
        }
        Ok(jac)
    }
}

fn check_unitary(u: &CMatrix) -> Result<(), MapError> {
    if !u.is_unitary(UNITARY_TOL) {
        return Err(MapError::Invalid("matrix is not unitary".into()));
    }
    Ok(())
}

/// Jacobian of `φ_a = N / D` with `N(z) = a - P_a z - s_a Q_a z` and
/// `D(z) = 1 - <z, a>`: `dφ = -(P_a + s_a Q_a)/D + N conj(a)^T / D^2`.
fn involution_derivative(a: &[Complex64], z: &[Complex64]) -> Result<CMatrix, MapError> {
    let n = a.len();
    let aa = norm_sqr(a);
    if aa == 0.0 {
        return Ok(CMatrix::identity(n).scale(-ONE));
    }
    let s = (1.0 - aa).max(0.0).sqrt();
    let d = ONE - inner(z, a);
    let num: Vec<Complex64> = {
        let c = inner(z, a) / aa;
        a.iter()
            .zip(z)
            .map(|(ai, zi)| (ONE - c) * ai - (zi - c * ai) * s)
            .collect()
    };
    let mut jac = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let p = a[i] * a[j].conj() / aa;
            let delta = if i == j { ONE } else { ZERO };
            let l = p + (delta - p) * s;
            jac[(i, j)] = -l / d + num[i] * a[j].conj() / (d * d);
        }
    }
    Ok(jac)
}

/// `ψ = φ_a ∘ φ ∘ φ_a`, which fixes the origin when `φ(a) = a`. For `a = 0`
/// the map is returned unchanged.
pub fn conjugate_to_origin(map: &HoloMap, a: &Point) -> Result<HoloMap, MapError> {
    let image = map.evaluate_raw(a.coords())?;
    let residual = crate::linalg::vector::distance(&image, a.coords());
    if !(residual <= FIXED_POINT_TOL) {
        return Err(MapError::NotFixedPoint { residual });
    }
    if a.is_origin() {
        return Ok(map.clone());
    }
    let inv = HoloMap::Involution(a.clone());
    HoloMap::composite(vec![inv.clone(), map.clone(), inv])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square_first() -> HoloMap {
        HoloMap::monomial(vec![
            MonomialTerm::new(ONE, vec![2, 0]),
            MonomialTerm::new(ZERO, vec![0, 0]),
        ])
        .unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let half = HoloMap::linear(CMatrix::diag(&[c(0.5, 0.0), c(0.5, 0.0)])).unwrap();
        let w = half.evaluate(&Point::real(&[0.8, 0.0])).unwrap();
        assert_eq!(w.coords(), &[c(0.4, 0.0), c(0.0, 0.0)]);

        let a = Point::new(vec![c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
        let m = HoloMap::mobius(CMatrix::identity(2), a.clone()).unwrap();
        assert!(m.evaluate(&a).unwrap().norm() < 1e-15);

        let w = square_first().evaluate(&Point::real(&[0.9, 0.0])).unwrap();
        assert!((w.coords()[0] - c(0.81, 0.0)).norm() < 1e-15);
        assert_eq!(w.coords()[1], ZERO);
    }

    #[test]
    fn rejects_non_contractive_linear() {
        assert!(HoloMap::linear(CMatrix::identity(2).scale(c(1.1, 0.0))).is_err());
        assert!(HoloMap::linear(CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])).is_ok());
        assert!(HoloMap::unitary(CMatrix::diag(&[c(0.5, 0.0)])).is_err());
    }

    #[test]
    fn out_of_ball_value_is_reported() {
        let doubled = HoloMap::monomial(vec![
            MonomialTerm::new(c(2.0, 0.0), vec![2, 0]),
            MonomialTerm::new(ZERO, vec![0, 0]),
        ])
        .unwrap();
        assert!(matches!(
            doubled.evaluate(&Point::real(&[0.9, 0.0])),
            Err(MapError::NotSelfMap { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let a = CMatrix::from_real_rows(&[&[0.2, 0.3], &[-0.1, 0.4]]);
        let lin = HoloMap::linear(a.clone()).unwrap();
        assert_eq!(lin.derivative_at(&Point::real(&[0.1, 0.7])).unwrap(), a);

        let d = square_first().derivative_at(&Point::real(&[0.5, 0.0])).unwrap();
        let expected = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(d.max_abs_diff(&expected) < 1e-9);

        let comp = HoloMap::composite(vec![lin.clone(), lin]).unwrap();
        let d = comp.derivative_at(&Point::origin(2)).unwrap();
        assert!(d.max_abs_diff(&a.mul(&a)) < 1e-15);
    }

    #[test]
    fn involution_derivative_matches_differences() {
        let a = Point::new(vec![c(0.3, -0.2), c(0.1, 0.5)]).unwrap();
        let map = HoloMap::Involution(a);
        let z = Point::new(vec![c(-0.4, 0.1), c(0.2, 0.3)]).unwrap();
        let exact = map.derivative_at(&z).unwrap();
        let numeric = map.finite_difference_jacobian(z.coords()).unwrap();
        assert!(exact.max_abs_diff(&numeric) < 1e-8);
        // φ_a ∘ φ_a = id, so dφ_a(φ_a(z)) dφ_a(z) = I.
        let w = map.evaluate(&z).unwrap();
        let prod = map.derivative_at(&w).unwrap().mul(&exact);
        assert!(prod.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn step_underflow_near_sphere() {
        let z = Point::real(&[1.0 - 1e-12, 0.0]);
        assert!(matches!(
            square_first().derivative_at(&z),
            Err(MapError::StepUnderflow { .. })
        ));
    }

    #[test]
    fn conjugation_moves_fixed_point_to_origin() {
        // Disc automorphism fixing 0.5: φ = φ_{0.5} ∘ (λ ·) ∘ φ_{0.5}.
        let p = Point::real(&[0.5]);
        let lambda = Complex64::from_polar(1.0, 0.7);
        let rot = HoloMap::unitary(CMatrix::diag(&[lambda])).unwrap();
        let inv = HoloMap::Involution(p.clone());
        let phi = HoloMap::composite(vec![inv.clone(), rot, inv]).unwrap();
        let psi = conjugate_to_origin(&phi, &p).unwrap();
        assert!(psi.evaluate(&Point::origin(1)).unwrap().norm() < 1e-10);

        let ev_a = eigenvalues(&phi.derivative_at(&p).unwrap()).unwrap();
        let ev_0 = eigenvalues(&psi.derivative_at(&Point::origin(1)).unwrap()).unwrap();
        assert!((ev_a[0] - ev_0[0]).norm() < 1e-7);
        assert!((ev_0[0] - lambda).norm() < 1e-12);

        assert!(matches!(
            conjugate_to_origin(&phi, &Point::real(&[0.1])),
            Err(MapError::NotFixedPoint { .. })
        ));
        let unchanged = conjugate_to_origin(&square_first(), &Point::origin(2)).unwrap();
        assert_eq!(unchanged, square_first());
    }

    #[test]
    fn automorphism_detection() {
        let u = CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(HoloMap::Linear(u.clone()).is_automorphism());
        assert!(HoloMap::unitary(u).unwrap().is_automorphism());
        assert!(!square_first().is_automorphism());
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        assert!(!half.is_automorphism());
    }
}
