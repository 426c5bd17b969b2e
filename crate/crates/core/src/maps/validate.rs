use rayon::prelude::*;

use super::{GridSpec, HoloMap, MapError, LINEAR_NORM_SLACK};
use crate::linalg::singular_values;
use crate::linalg::vector::norm;

/// Outcome of a successful self-map check.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfMapCertificate {
    /// `δ_1` for linear maps, otherwise the largest `|φ(z)|` seen on the grid.
    pub max_norm: f64,
    /// True when the check is exact rather than sampled.
    pub exact: bool,
}

impl SelfMapCertificate {
    pub fn margin(&self) -> f64 {
        1.0 - self.max_norm
    }
}

/// Checks `φ(B_n) ⊆ B_n`: exactly through `δ_1 <= 1` for linear maps, on the
/// grid for everything else. A violation reports the first offending sample
/// in radius-major order.
pub fn validate_self_map(map: &HoloMap, grid: &GridSpec) -> Result<SelfMapCertificate, MapError> {
    if let HoloMap::Linear(a) = map {
        let delta1 = singular_values(a)?[0];
        if delta1 > 1.0 + LINEAR_NORM_SLACK {
            // The top right singular vector attains δ_1.
            let v = crate::linalg::svd(a)?.v.column(0);
            return Err(MapError::Violation {
                point: v,
                norm: delta1,
            });
        }
        return Ok(SelfMapCertificate {
            max_norm: delta1,
            exact: true,
        });
    }

    let points = grid.points(map.dim());
    let norms: Vec<f64> = points
        .par_iter()
        .map(|z| match map.evaluate_raw(z) {
            Ok(w) => norm(&w),
            Err(_) => f64::INFINITY,
        })
        .collect();
    if let Some(i) = norms.iter().position(|n| !(*n < 1.0)) {
        return Err(MapError::Violation {
            point: points[i].clone(),
            norm: norms[i],
        });
    }
    Ok(SelfMapCertificate {
        max_norm: norms.iter().copied().fold(0.0, f64::max),
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::maps::MonomialTerm;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_checks_are_exact() {
        let grid = GridSpec::geometric(4, 2, 0);
        let shift = HoloMap::Linear(CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
        let cert = validate_self_map(&shift, &grid).unwrap();
        assert!(cert.exact && (cert.max_norm - 1.0).abs() < 1e-15);

        let big = HoloMap::Linear(CMatrix::identity(2).scale(c(1.1, 0.0)));
        assert!(matches!(
            validate_self_map(&big, &grid),
            Err(MapError::Violation { norm, .. }) if (norm - 1.1).abs() < 1e-12
        ));
    }

    #[test]
    fn oversized_monomial_is_caught() {
        let grid = GridSpec::geometric(8, 4, 0);
        let doubled = HoloMap::monomial(vec![
            MonomialTerm::new(c(2.0, 0.0), vec![2, 0]),
            MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
        ])
        .unwrap();
        match validate_self_map(&doubled, &grid) {
            Err(MapError::Violation { point, norm }) => {
                assert!(norm >= 1.0);
                assert!((2.0 * point[0].norm_sqr() - norm).abs() < 1e-12);
                assert!(point[0].norm() > 0.7 && point[1].norm() < 1e-15);
            }
            other => panic!("expected violation, got {other:?}"),
        }

        let square = HoloMap::monomial(vec![
            MonomialTerm::new(c(1.0, 0.0), vec![2, 0]),
            MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
        ])
        .unwrap();
        let cert = validate_self_map(&square, &grid).unwrap();
        assert!(!cert.exact && cert.max_norm < 1.0);
    }
}
