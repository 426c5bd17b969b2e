use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{ErgodicityError, TestFunction};
use crate::geometry::{bergman_distance_raw, involution_raw};
use crate::maps::GridSpec;

fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let len = crate::linalg::vector::norm(&v);
        if len > 1e-8 {
            return v.iter().map(|c| c / len).collect();
        }
    }
}

/// Pairs `(u, v)` with `β(u, v) <= r`: `u` has radius `1 - 10^{-t}` with
/// `t` uniform in `[0, 3]`, and `v = φ_u(w)` with `|w| <= tanh r`, so that
/// `β(u, v) = atanh |w|`.
pub fn bergman_pairs(n: usize, count: usize, r: f64, seed: u64) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = r.tanh();
    (0..count)
        .map(|_| {
            let radius = 1.0 - 10f64.powf(-rng.gen_range(0.0..3.0));
            let u: Vec<Complex64> = random_direction(n, &mut rng).iter().map(|c| c * radius).collect();
            let w: Vec<Complex64> = random_direction(n, &mut rng)
                .iter()
                .map(|c| c * reach * rng.gen_range(0.0f64..1.0))
                .collect();
            let v = involution_raw(&u, &w).expect("interior centre");
            (u, v)
        })
        .collect()
}

/// Polynomials of total degree `1..=degree` with standard normal complex
/// coefficients, nonconstant so that `‖f‖` controls the oscillation.
pub fn random_polynomials(n: usize, count: usize, degree: u32, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exponents = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        let total: u32 = e.iter().sum();
        if (1..=degree).contains(&total) {
            exponents.push(e.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                break;
            }
            e[k] += 1;
            if e[k] <= degree {
                break;
            }
            e[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    (0..count)
        .map(|_| {
            TestFunction::Polynomial(
                exponents
                    .iter()
                    .map(|e| {
                        let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                        (c, e.clone())
                    })
                    .collect(),
            )
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport {
    /// `max |f(u) - f(v)| / (β(u, v) ‖f‖_grid)` over functions and pairs.
    pub max_ratio: f64,
    pub worst_function: usize,
    pub worst_pair: usize,
}

/// Bergman-Lipschitz ratio of each function over each pair, normalized by
/// the grid sup of the function. Pairs with `β = 0` are skipped.
pub fn lipschitz_ratio(
    functions: &[TestFunction],
    pairs: &[(Vec<Complex64>, Vec<Complex64>)],
    grid: &GridSpec,
) -> Result<LipschitzReport, ErgodicityError> {
    let n = pairs.first().map_or(1, |p| p.0.len());
    let points = grid.points(n);
    let betas: Vec<f64> = pairs.iter().map(|(u, v)| bergman_distance_raw(u, v)).collect();
    let per_function: Vec<(f64, usize)> = functions
        .par_iter()
        .map(|f| {
            let mut sup: f64 = 0.0;
            for z in &points {
                sup = sup.max(f.eval(z)?.norm());
            }
            let mut best = (0.0, 0);
            for (i, ((u, v), &b)) in pairs.iter().zip(&betas).enumerate() {
                if b > 0.0 {
                    let ratio = (f.eval(u)? - f.eval(v)?).norm() / (b * sup);
                    if ratio > best.0 {
                        best = (ratio, i);
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_, ErgodicityError>>()?;
    let (worst_function, &(max_ratio, worst_pair)) = per_function
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .ok_or_else(|| ErgodicityError::Dictionary("no functions".into()))?;
    Ok(LipschitzReport {
        max_ratio,
        worst_function,
        worst_pair,
    })
}
