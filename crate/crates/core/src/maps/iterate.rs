use num_complex::Complex64;
use rayon::prelude::*;

use super::{GridSpec, HoloMap, MapError, MonomialTerm};
use crate::geometry::Point;
use crate::linalg::matrix_power;
use crate::linalg::vector::{distance, norm};

/// Memoized power-of-two iterates `φ_{2^m}` of one map.
///
/// Linear and unitary maps go straight through [`matrix_power`]. Monomial
/// maps are squared symbolically while the exponents fit in `u64`; beyond
/// that, and for every other variant, the largest cached power is applied
/// repeatedly. The cache is plain owned state: give each worker its own.
#[derive(Clone, Debug)]
pub struct PowerCache {
    powers: Vec<HoloMap>,
    saturated: bool,
}

impl PowerCache {
    pub fn new(map: &HoloMap) -> Self {
        let saturated = !matches!(map, HoloMap::Monomial(_));
        Self {
            powers: vec![map.clone()],
            saturated,
        }
    }

    pub fn base(&self) -> &HoloMap {
        &self.powers[0]
    }

    /// Index of the largest available power not exceeding `m`.
    fn ensure(&mut self, m: usize) -> usize {
        while self.powers.len() <= m && !self.saturated {
            let last = self.powers.last().expect("nonempty");
            match last {
                HoloMap::Monomial(t) => match compose_monomials(t, t) {
                    Some(sq) => self.powers.push(HoloMap::Monomial(sq)),
                    None => self.saturated = true,
                },
                _ => self.saturated = true,
            }
        }
        m.min(self.powers.len() - 1)
    }

    /// `φ_j(z)` without the interior check; `φ_0 = id`.
    pub fn iterate_raw(&mut self, j: u64, z: &[Complex64]) -> Result<Vec<Complex64>, MapError> {
        if let HoloMap::Linear(m) | HoloMap::Unitary(m) = self.base() {
            return Ok(matrix_power(m, j).mul_vec(z));
        }
        let mut w = z.to_vec();
        let mut bits = j;
        let mut m = 0usize;
        while bits > 0 {
            if bits & 1 == 1 {
                let top = self.ensure(m);
                let repeats = 1u64 << (m - top);
                for _ in 0..repeats {
                    w = self.powers[top].evaluate_raw(&w)?;
                }
            }
            bits >>= 1;
            m += 1;
        }
        Ok(w)
    }

    pub fn iterate(&mut self, j: u64, z: &Point) -> Result<Point, MapError> {
        let w = self.iterate_raw(j, z.coords())?;
        let n = norm(&w);
        if !(n < 1.0) {
            return Err(MapError::NotSelfMap { norm: n });
        }
        Ok(Point::new(w)?)
    }
}

/// `f ∘ g` for monomial maps, or `None` when an exponent overflows.
fn compose_monomials(f: &[MonomialTerm], g: &[MonomialTerm]) -> Option<Vec<MonomialTerm>> {
    let n = f.len();
    f.iter()
        .map(|ft| {
            let mut coeff = ft.coeff;
            let mut exps = vec![0u64; n];
            for (k, &p) in ft.exponents.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                coeff *= super::cpow(g[k].coeff, p);
                for (l, &q) in g[k].exponents.iter().enumerate() {
                    exps[l] = exps[l].checked_add(p.checked_mul(q)?)?;
                }
            }
            Some(MonomialTerm::new(coeff, exps))
        })
        .collect()
}

/// `φ_j(z)` for `j >= 1`.
pub fn iterate(map: &HoloMap, j: u64, z: &Point) -> Result<Point, MapError> {
    PowerCache::new(map).iterate(j, z)
}

/// `[φ_1(z), ..., φ_{j_max}(z)]` by successive evaluation.
pub fn orbit(map: &HoloMap, z: &[Complex64], j_max: usize) -> Result<Vec<Vec<Complex64>>, MapError> {
    let mut out = Vec::with_capacity(j_max);
    let mut w = z.to_vec();
    for _ in 0..j_max {
        w = map.evaluate_raw(&w)?;
        out.push(w.clone());
    }
    Ok(out)
}

/// Grid lower bound for `‖φ_j - a‖_∞ = sup_z |φ_j(z) - a|`.
pub fn sup_norm_deviation(map: &HoloMap, a: &Point, j: u64, grid: &GridSpec) -> Result<f64, MapError> {
    grid.points(map.dim())
        .par_iter()
        .map_init(
            || PowerCache::new(map),
            |cache, z| Ok(distance(&cache.iterate_raw(j, z)?, a.coords())),
        )
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square_first() -> HoloMap {
        HoloMap::monomial(vec![
            MonomialTerm::new(c(1.0, 0.0), vec![2, 0]),
            MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
        ])
        .unwrap()
    }

    #[test]
    fn iterate_examples() {
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        let w = iterate(&half, 3, &Point::real(&[0.8, 0.0])).unwrap();
        assert!((w.coords()[0] - c(0.1, 0.0)).norm() < 1e-16);

        let rot = HoloMap::unitary(CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        let z = Point::new(vec![c(0.3, -0.1), c(0.2, 0.5)]).unwrap();
        let w = iterate(&rot, 4, &z).unwrap();
        assert!(w.coords().iter().zip(z.coords()).all(|(a, b)| (a - b).norm() < 1e-15));

        let w = iterate(&square_first(), 3, &Point::real(&[0.9, 0.0])).unwrap();
        assert!((w.coords()[0].re - 0.9f64.powi(8)).abs() < 1e-15);
    }

    #[test]
    fn cached_powers_agree_with_orbit() {
        let cube = HoloMap::monomial(vec![
            MonomialTerm::new(c(0.0, 0.9), vec![1, 2]),
            MonomialTerm::new(c(0.8, 0.0), vec![2, 0]),
        ])
        .unwrap();
        let z = vec![c(0.4, 0.2), c(-0.3, 0.5)];
        let path = orbit(&cube, &z, 12).unwrap();
        let mut cache = PowerCache::new(&cube);
        for j in 1..=12u64 {
            let w = cache.iterate_raw(j, &z).unwrap();
            assert!(distance(&w, &path[j as usize - 1]) < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn exponent_overflow_falls_back_to_evaluation() {
        let map = square_first();
        let mut cache = PowerCache::new(&map);
        let z = vec![c(0.999, 0.0), c(0.0, 0.0)];
        // φ_{2^m} = z_1^{2^{2^m}} fits in u64 only up to m = 5.
        let w = cache.iterate_raw(200, &z).unwrap();
        assert_eq!(cache.powers.len(), 6);
        assert_eq!(w[0], c(0.0, 0.0));
        let w = cache.iterate_raw(40, &z).unwrap();
        assert_eq!(w, orbit(&map, &z, 40).unwrap()[39]);
    }

    #[test]
    fn sup_norm_examples() {
        let grid = GridSpec::geometric(10, 4, 1);
        let r_max = grid.r_max();
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        for j in 1..5 {
            let s = sup_norm_deviation(&half, &Point::origin(2), j, &grid).unwrap();
            assert!((s - 0.5f64.powi(j as i32) * r_max).abs() < 1e-6);
        }
        let rot = HoloMap::unitary(CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        for j in 1..5 {
            assert!(sup_norm_deviation(&rot, &Point::origin(2), j, &grid).unwrap() >= r_max - 1e-15);
        }
        let coarse = sup_norm_deviation(&square_first(), &Point::origin(2), 3, &grid).unwrap();
        let fine_grid = GridSpec::geometric(30, 4, 1);
        let fine = sup_norm_deviation(&square_first(), &Point::origin(2), 3, &fine_grid).unwrap();
        assert!(fine >= coarse && fine > 0.99);
    }
}
