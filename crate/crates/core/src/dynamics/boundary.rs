use num_complex::Complex64;
use rayon::prelude::*;

use super::{DynamicsError, RetractionEstimate};
use crate::geometry::BoundaryPoint;
use crate::linalg::vector::{distance, norm};
use crate::maps::{GridSpec, HoloMap};

/// Default width `η` of the region `L(ρ, η) = {z : |z - ρ(z)| >= η}`.
pub const DEFAULT_ETA: f64 = 0.5;
/// Required excess of the minimal dilation ratio over 1.
pub const DILATION_MARGIN: f64 = 1e-3;
/// Slack on region membership so that samples on `|z - ρ(z)| = η` count.
const REGION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DenjoyWolff {
    pub point: BoundaryPoint,
    /// Distance from the last iterate to the reported boundary point.
    pub residual: f64,
    /// Number of iterations used.
    pub steps: usize,
}

/// Normalized limit of `φ_j(0)`: iteration stops once `|φ_j(0)| > 1 - tol`
/// and successive iterates are within `tol`.
pub fn denjoy_wolff(map: &HoloMap, tol: f64, j_max: usize) -> Result<DenjoyWolff, DynamicsError> {
    let mut w = vec![Complex64::new(0.0, 0.0); map.dim()];
    for j in 1..=j_max {
        let next = map.evaluate_raw(&w)?;
        let step = distance(&next, &w);
        w = next;
        let r = norm(&w);
        if r > 1.0 - tol && step <= tol {
            let point = BoundaryPoint::from_direction(&w)?;
            let residual = distance(&w, point.coords());
            return Ok(DenjoyWolff {
                point,
                residual,
                steps: j,
            });
        }
    }
    Err(DynamicsError::NotEscaping { norm: norm(&w) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilationRatio {
    pub min_ratio: f64,
    pub arg_min: Vec<Complex64>,
    /// Number of grid samples inside `L(ρ, η)`.
    pub region_size: usize,
    /// `min_ratio > 1 + DILATION_MARGIN`.
    pub exceeds_one: bool,
}

/// Minimum of `(1 - |φ(z)|)/(1 - |z|)` over grid samples with
/// `|z - ρ(z)| >= η`.
pub fn boundary_dilation_ratio(
    map: &HoloMap,
    retraction: &RetractionEstimate,
    eta: f64,
    grid: &GridSpec,
) -> Result<DilationRatio, DynamicsError> {
    let points = grid.points(map.dim());
    let candidates: Vec<Option<(f64, usize)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, z)| -> Result<Option<(f64, usize)>, DynamicsError> {
            let rho = retraction.apply(z)?;
            if distance(z, &rho) < eta - REGION_SLACK {
                return Ok(None);
            }
            let image = map.evaluate_raw(z)?;
            Ok(Some(((1.0 - norm(&image)) / (1.0 - norm(z)), i)))
        })
        .collect::<Result<_, _>>()?;
    let inside: Vec<(f64, usize)> = candidates.into_iter().flatten().collect();
    let &(min_ratio, i) = inside
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(DynamicsError::EmptyRegion)?;
    Ok(DilationRatio {
        min_ratio,
        arg_min: points[i].clone(),
        region_size: inside.len(),
        exceeds_one: min_ratio > 1.0 + DILATION_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::estimate_retraction;
    use crate::geometry::Point;
    use crate::linalg::CMatrix;
    use crate::maps::MonomialTerm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hyperbolic(t: f64) -> HoloMap {
        HoloMap::mobius(CMatrix::identity(2).scale(c(-1.0, 0.0)), Point::real(&[-t, 0.0])).unwrap()
    }

    #[test]
    fn denjoy_wolff_examples() {
        let dw = denjoy_wolff(&hyperbolic(0.5), 1e-10, 400).unwrap();
        assert!(distance(dw.point.coords(), &[c(1.0, 0.0), c(0.0, 0.0)]) < 1e-6);

        let swap = HoloMap::unitary(CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let conj = HoloMap::composite(vec![swap.clone(), hyperbolic(0.5), swap]).unwrap();
        let dw = denjoy_wolff(&conj, 1e-10, 400).unwrap();
        assert!(distance(dw.point.coords(), &[c(0.0, 0.0), c(1.0, 0.0)]) < 1e-6);

        let dw = denjoy_wolff(&hyperbolic(0.9), 1e-10, 400).unwrap();
        assert!(distance(dw.point.coords(), &[c(1.0, 0.0), c(0.0, 0.0)]) < 1e-6);
        assert!(dw.residual < 1e-9);
    }

    #[test]
    fn contraction_does_not_escape() {
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        assert!(matches!(
            denjoy_wolff(&half, 1e-10, 50),
            Err(DynamicsError::NotEscaping { .. })
        ));
    }

    #[test]
    fn dilation_examples() {
        let grid = GridSpec::geometric(16, 8, 3);
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        let rho = estimate_retraction(&half, 1, 64, &grid, 1e-8).unwrap();
        let d = boundary_dilation_ratio(&half, &rho, 0.5, &grid).unwrap();
        assert!((d.min_ratio - 1.5).abs() < 1e-12 && d.exceeds_one);

        let square = HoloMap::monomial(vec![
            MonomialTerm::new(c(1.0, 0.0), vec![2, 0]),
            MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
        ])
        .unwrap();
        let rho = estimate_retraction(&square, 1, 64, &grid, 1e-8).unwrap();
        let d = boundary_dilation_ratio(&square, &rho, 0.5, &grid).unwrap();
        assert!((d.min_ratio - 1.5).abs() < 1e-12, "{}", d.min_ratio);

        let rot = HoloMap::unitary(CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        let rho = estimate_retraction(&rot, 4, 16, &grid, 1e-8).unwrap();
        assert_eq!(
            boundary_dilation_ratio(&rot, &rho, 0.5, &grid),
            Err(DynamicsError::EmptyRegion)
        );
    }
}
