use num_complex::Complex64;

use super::{denjoy_wolff, DynamicsError};
use crate::geometry::{BoundaryPoint, Point};
use crate::linalg::vector::{norm, sub};
use crate::linalg::{solve_least_squares, spectral_report, CMatrix, SpectralReport, DEFAULT_MODULUS_TOL, DEFAULT_Q_MAX};
use crate::maps::{conjugate_to_origin, HoloMap};

pub const DEFAULT_FIXED_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_BUDGET: usize = 400;

/// Newton iterations spent on one seed.
const NEWTON_STEPS_PER_SEED: usize = 60;
const MAX_HALVINGS: usize = 60;
/// A fixed point must also satisfy `|φ(z) - z| <= RELATIVE_RESIDUAL (1 - |z|)`:
/// near the sphere `φ(z) - z` can be tiny without any fixed point nearby.
const RELATIVE_RESIDUAL: f64 = 1e-3;
/// Newton iterates and accepted fixed points keep `1 - |z| >= INTERIOR_MARGIN`;
/// closer to the sphere `φ(z)` rounds to `z` for fixed-point-free maps.
pub const INTERIOR_MARGIN: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum FixedBehavior {
    InteriorFixed { a: Point, report: SpectralReport },
    NoInteriorFixed { dw: BoundaryPoint, residual: f64 },
}

struct Residual {
    value: Vec<Complex64>,
    norm: f64,
}

fn residual(map: &HoloMap, z: &[Complex64]) -> Result<Residual, DynamicsError> {
    let value = sub(&map.evaluate_raw(z)?, z);
    let norm = norm(&value);
    Ok(Residual { value, norm })
}

fn accepted(r: f64, z: &[Complex64], tol: f64) -> bool {
    let margin = 1.0 - norm(z);
    margin >= INTERIOR_MARGIN && r <= tol && r <= RELATIVE_RESIDUAL * margin
}

/// Damped Newton on `F(z) = φ(z) - z`. Returns the final iterate and its
/// residual norm; `steps` is decremented per iteration.
fn newton(
    map: &HoloMap,
    seed: &[Complex64],
    tol: f64,
    steps: &mut usize,
) -> Result<(Vec<Complex64>, f64), DynamicsError> {
    let n = seed.len();
    let mut z = seed.to_vec();
    let mut f = residual(map, &z)?;
    for _ in 0..NEWTON_STEPS_PER_SEED {
        if accepted(f.norm, &z, tol) || *steps == 0 {
            break;
        }
        *steps -= 1;
        let point = match Point::new(z.clone()) {
            Ok(p) => p,
            Err(_) => break,
        };
        let jac = match map.derivative_at(&point) {
            Ok(d) => d.sub(&CMatrix::identity(n)),
            Err(_) => break,
        };
        let rhs: Vec<Complex64> = f.value.iter().map(|c| -c).collect();
        let delta = solve_least_squares(&jac, &rhs, 1e-12)?;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<Complex64> = z.iter().zip(&delta).map(|(a, d)| a + d * t).collect();
            if norm(&cand) <= 1.0 - INTERIOR_MARGIN {
                if let Ok(fc) = residual(map, &cand) {
                    if fc.norm < f.norm {
                        z = cand;
                        f = fc;
                        improved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((z, f.norm))
}

/// Interior fixed point of `map`, `None` when the orbit of 0 escapes to the
/// sphere (`|φ_j(0)| > 1 - tol`) and Newton finds nothing.
///
/// Linear and unitary maps fix the origin. Otherwise Newton is seeded from 0,
/// from orbit points `φ_{2^m}(0)` and from Cesàro averages of the orbit.
pub fn find_fixed_point(map: &HoloMap, tol: f64, budget: usize) -> Result<Option<Point>, DynamicsError> {
    let n = map.dim();
    if matches!(map, HoloMap::Linear(_) | HoloMap::Unitary(_)) {
        return Ok(Some(Point::origin(n)));
    }

    let origin = vec![Complex64::new(0.0, 0.0); n];
    let mut orbit = Vec::new();
    let mut escaped = false;
    let mut w = origin.clone();
    for _ in 0..budget.max(1) {
        w = map.evaluate_raw(&w)?;
        if norm(&w) > 1.0 - tol {
            escaped = true;
            break;
        }
        orbit.push(w.clone());
    }

    let mut seeds = vec![origin];
    let mut m = 1;
    while m <= orbit.len() {
        seeds.push(orbit[m - 1].clone());
        let mean: Vec<Complex64> = (0..n)
            .map(|i| orbit[..m].iter().map(|p| p[i]).sum::<Complex64>() / m as f64)
            .collect();
        seeds.push(mean);
        m *= 2;
    }
    if let Some(last) = orbit.last() {
        seeds.push(last.clone());
    }

    let mut steps = budget;
    let mut best = f64::INFINITY;
    for seed in &seeds {
        let (z, r) = newton(map, seed, tol, &mut steps)?;
        if accepted(r, &z, tol) {
            return Ok(Some(Point::new(z)?));
        }
        best = best.min(r);
        if steps == 0 {
            break;
        }
    }
    if escaped {
        Ok(None)
    } else {
        Err(DynamicsError::Inconclusive { residual: best })
    }
}

/// Fixed point with the spectral data of `d_0 ψ` for the conjugate
/// `ψ = φ_a ∘ φ ∘ φ_a`, or the Denjoy-Wolff estimate when there is none.
pub fn fixed_behavior(map: &HoloMap, tol: f64, budget: usize) -> Result<FixedBehavior, DynamicsError> {
    match find_fixed_point(map, tol, budget)? {
        Some(a) => {
            let psi = conjugate_to_origin(map, &a)?;
            let d = psi.derivative_at(&Point::origin(map.dim()))?;
            let report = spectral_report(&d, DEFAULT_MODULUS_TOL, DEFAULT_Q_MAX)?;
            Ok(FixedBehavior::InteriorFixed { a, report })
        }
        None => {
            let dw = denjoy_wolff(map, tol, budget)?;
            Ok(FixedBehavior::NoInteriorFixed {
                dw: dw.point,
                residual: dw.residual,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::distance;
    use crate::maps::MonomialTerm;

    fn fixed_residual(map: &HoloMap, a: &Point) -> Result<f64, DynamicsError> {
        Ok(distance(&map.evaluate_raw(a.coords())?, a.coords()))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `(z_1 + t)/(1 + t z_1)` on the first axis, extended to an automorphism
    /// of `B_2`.
    fn hyperbolic(t: f64) -> HoloMap {
        HoloMap::mobius(CMatrix::identity(2).scale(c(-1.0, 0.0)), Point::real(&[-t, 0.0])).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        assert!(find_fixed_point(&half, 1e-10, 100).unwrap().unwrap().is_origin());

        assert_eq!(find_fixed_point(&hyperbolic(0.5), 1e-10, 400).unwrap(), None);

        let sq = HoloMap::monomial(vec![
            MonomialTerm::new(c(1.0, 0.0), vec![2, 0]),
            MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
        ])
        .unwrap();
        assert!(find_fixed_point(&sq, 1e-10, 100).unwrap().unwrap().is_origin());
    }

    #[test]
    fn finds_a_displaced_fixed_point() {
        // φ_p ∘ (0.5 z) ∘ φ_p fixes p.
        let p = Point::new(vec![c(0.3, 0.2), c(-0.1, 0.4)]).unwrap();
        let inv = HoloMap::Involution(p.clone());
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        let map = HoloMap::composite(vec![inv.clone(), half, inv]).unwrap();
        let a = find_fixed_point(&map, 1e-10, 400).unwrap().unwrap();
        assert!(distance(a.coords(), p.coords()) < 1e-9);
        assert!(fixed_residual(&map, &a).unwrap() <= 1e-10);

        // Elliptic automorphism: orbit of 0 circles p, Newton still lands on it.
        let inv = HoloMap::Involution(p.clone());
        let rot = HoloMap::unitary(CMatrix::diag(&[c(0.0, 1.0), Complex64::from_polar(1.0, 1.0)])).unwrap();
        let map = HoloMap::composite(vec![inv.clone(), rot, inv]).unwrap();
        let a = find_fixed_point(&map, 1e-10, 400).unwrap().unwrap();
        assert!(distance(a.coords(), p.coords()) < 1e-9);
    }

    #[test]
    fn slow_escape_is_inconclusive() {
        // Parabolic-like pull: the orbit creeps to the sphere too slowly to
        // certify escape within a tiny budget.
        let map = hyperbolic(0.01);
        assert!(matches!(
            find_fixed_point(&map, 1e-10, 5),
            Err(DynamicsError::Inconclusive { .. })
        ));
    }

    #[test]
    fn behavior_reports_spectrum_at_the_fixed_point() {
        let p = Point::real(&[0.4, 0.0]);
        let inv = HoloMap::Involution(p.clone());
        let lin = HoloMap::linear(CMatrix::diag(&[c(0.0, 1.0), c(0.5, 0.0)])).unwrap();
        let map = HoloMap::composite(vec![inv.clone(), lin, inv]).unwrap();
        match fixed_behavior(&map, 1e-10, 400).unwrap() {
            FixedBehavior::InteriorFixed { a, report } => {
                assert!(distance(a.coords(), p.coords()) < 1e-9);
                assert_eq!(report.unity_orders.len(), 1);
                assert_eq!(report.unity_orders[0].1, Some(4));
            }
            other => panic!("{other:?}"),
        }
        match fixed_behavior(&hyperbolic(0.5), 1e-10, 400).unwrap() {
            FixedBehavior::NoInteriorFixed { dw, .. } => {
                assert!((dw.coords()[0] - c(1.0, 0.0)).norm() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }
}
