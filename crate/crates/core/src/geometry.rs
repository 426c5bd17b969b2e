//! Möbius geometry of the unit ball `B_n ⊂ C^n`: points, the involutive
//! automorphisms `φ_a`, the Bergman metric and the ellipsoids used by Julia's
//! lemma.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::vector::{inner, norm, norm_sqr};
use crate::linalg::CMatrix;

/// Tolerance on `|ζ| = 1` for boundary points.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Below this modulus `1 - <z, a>` is treated as vanishing.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point has norm {norm}, not inside the unit ball")]
    NotInterior { norm: f64 },
    #[error("point has norm {norm}, not on the unit sphere")]
    NotOnBoundary { norm: f64 },
    #[error("points live in different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("empty coordinate vector")]
    Empty,
    #[error("denominator 1 - <z, a> vanishes ({0:e})")]
    DenominatorVanishes(f64),
    #[error("argument {0} outside [0, 1)")]
    OutOfRange(f64),
}

/// A point of the open unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Point(Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::Empty);
        }
        let n = norm(&coords);
        // Negated comparison so that NaN is rejected as well.
        if !(n < 1.0) {
            return Err(GeometryError::NotInterior { norm: n });
        }
        Ok(Self(coords))
    }

    /// Point with real coordinates; panics if it is not interior.
    pub fn real(coords: &[f64]) -> Self {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .expect("interior point")
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

impl TryFrom<Vec<Complex64>> for Point {
    type Error = GeometryError;

    fn try_from(v: Vec<Complex64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Point> for Vec<Complex64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// A point of the unit sphere `∂B_n`, kept separate from [`Point`] so that
/// interior code paths never receive it by accident.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct BoundaryPoint(Vec<Complex64>);

impl BoundaryPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::Empty);
        }
        let n = norm(&coords);
        if !((n - 1.0).abs() <= BOUNDARY_TOL) {
            return Err(GeometryError::NotOnBoundary { norm: n });
        }
        Ok(Self(coords))
    }

    /// Normalizes a nonzero direction onto the sphere.
    pub fn from_direction(v: &[Complex64]) -> Result<Self, GeometryError> {
        let n = norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeometryError::NotOnBoundary { norm: n });
        }
        Self::new(v.iter().map(|c| c / n).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<Complex64>> for BoundaryPoint {
    type Error = GeometryError;

    fn try_from(v: Vec<Complex64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<BoundaryPoint> for Vec<Complex64> {
    fn from(p: BoundaryPoint) -> Self {
        p.0
    }
}

/// Data of the involution `φ_a`: `s_a = sqrt(1 - |a|^2)` and the orthogonal
/// projections onto `span(a)` and its complement.
#[derive(Clone, Debug)]
pub struct InvolutionParams {
    pub a: Point,
    pub s: f64,
    pub p: CMatrix,
    pub q: CMatrix,
}

impl InvolutionParams {
    /// Fails for `a = 0`, where the projection onto `span(a)` is undefined.
    pub fn new(a: &Point) -> Option<Self> {
        let n = a.dim();
        let aa = norm_sqr(a.coords());
        if aa == 0.0 {
            return None;
        }
        let mut p = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] = a.coords()[i] * a.coords()[j].conj() / aa;
            }
        }
        let q = CMatrix::identity(n).sub(&p);
        Some(Self {
            a: a.clone(),
            s: (1.0 - aa).sqrt(),
            p,
            q,
        })
    }
}

/// `φ_a(z)` on raw coordinates. Works on the closed ball as long as the
/// denominator does not vanish; `φ_0 = -id`.
/// `1 - <z, w>` with fused multiply-adds, so that the cancellation near the
/// sphere costs one rounding instead of one per coordinate.
pub fn one_minus_inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    let mut re = 1.0;
    let mut im = 0.0;
    for (a, b) in z.iter().zip(w) {
        re = (-a.re).mul_add(b.re, re);
        re = (-a.im).mul_add(b.im, re);
        im = (-a.im).mul_add(b.re, im);
        im = a.re.mul_add(b.im, im);
    }
    Complex64::new(re, im)
}

pub fn involution_raw(a: &[Complex64], z: &[Complex64]) -> Result<Vec<Complex64>, GeometryError> {
    if a.len() != z.len() {
        return Err(GeometryError::DimensionMismatch(a.len(), z.len()));
    }
    let aa = norm_sqr(a);
    if aa == 0.0 {
        return Ok(z.iter().map(|c| -c).collect());
    }
    let denom = one_minus_inner(z, a);
    if denom.norm() < DENOMINATOR_FLOOR {
        return Err(GeometryError::DenominatorVanishes(denom.norm()));
    }
    // P_a z = c a with c = <z,a>/|a|^2; the numerator is
    // a - c a - s (z - c a), which vanishes exactly at z = a.
    let diff: Vec<Complex64> = a.iter().zip(z).map(|(ai, zi)| ai - zi).collect();
    let one_minus_c = inner(&diff, a) / aa;
    let c = Complex64::new(1.0, 0.0) - one_minus_c;
    let s = one_minus_inner(a, a).re.max(0.0).sqrt();
    Ok(a.iter()
        .zip(z)
        .map(|(ai, zi)| (one_minus_c * ai - (zi - c * ai) * s) / denom)
        .collect())
}

/// The involutive automorphism `φ_a` swapping `0` and `a`.
pub fn involution_apply(a: &Point, z: &Point) -> Result<Point, GeometryError> {
    Point::new(involution_raw(a.coords(), z.coords())?)
}

/// Pseudo-hyperbolic distance `|φ_z(w)|` together with `1 - |φ_z(w)|^2`
/// computed without cancellation.
fn pseudo_hyperbolic_parts(z: &[Complex64], w: &[Complex64]) -> (f64, f64) {
    let t = involution_raw(z, w)
        .map(|v| norm(&v))
        .unwrap_or(1.0)
        .min(1.0);
    let zz = one_minus_inner(z, z).re;
    let ww = one_minus_inner(w, w).re;
    let d = one_minus_inner(z, w).norm_sqr();
    let one_minus_t2 = (zz * ww / d).clamp(0.0, 1.0);
    (t, one_minus_t2)
}

/// `|φ_z(w)|`.
pub fn pseudo_hyperbolic(z: &Point, w: &Point) -> f64 {
    pseudo_hyperbolic_parts(z.coords(), w.coords()).0
}

/// Bergman distance `β(z, w) = ½ log((1 + t)/(1 - t))`, `t = |φ_z(w)|`.
pub fn bergman_distance(z: &Point, w: &Point) -> f64 {
    bergman_distance_raw(z.coords(), w.coords())
}

pub fn bergman_distance_raw(z: &[Complex64], w: &[Complex64]) -> f64 {
    let (t, one_minus_t2) = pseudo_hyperbolic_parts(z, w);
    if t == 0.0 {
        return 0.0;
    }
    if one_minus_t2 == 0.0 {
        return f64::INFINITY;
    }
    // Near the boundary t rounds to 1; 1 - t^2 carries the precision instead.
    if t < 0.5 {
        t.atanh()
    } else {
        ((1.0 + t) / one_minus_t2.sqrt()).ln()
    }
}

/// Membership in the Bergman ball `B(z, r) = {w : β(z, w) < r}`.
pub fn bergman_ball_contains(z: &Point, r: f64, w: &Point) -> bool {
    bergman_distance(z, w) < r
}

/// Julia ellipsoid `E(k, ζ) = {z : |1 - <z, ζ>|^2 <= k (1 - |z|^2)}`.
pub fn ellipsoid_contains(k: f64, zeta: &BoundaryPoint, z: &Point) -> bool {
    let lhs = (Complex64::new(1.0, 0.0) - inner(z.coords(), zeta.coords())).norm_sqr();
    lhs <= k * (1.0 - norm_sqr(z.coords()))
}

/// Poincaré distance from 0 to `t` in the disc, `½ log((1+t)/(1-t))`.
pub fn poincare_omega(t: f64) -> Result<f64, GeometryError> {
    if !(0.0..1.0).contains(&t) {
        return Err(GeometryError::OutOfRange(t));
    }
    Ok(t.atanh())
}
