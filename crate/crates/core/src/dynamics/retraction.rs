use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::DynamicsError;
use crate::geometry::{bergman_distance_raw, poincare_omega};
use crate::linalg::vector::distance;
use crate::linalg::{contracting_block, matrix_power, singular_values, CMatrix, DEFAULT_MODULUS_TOL};
use crate::maps::{GridSpec, HoloMap, MapError, PowerCache};

/// Slack when judging a trace as non-increasing.
const TREND_SLACK: f64 = 1e-12;
/// Samples used for the `ρ ∘ φ_l = ρ ∘ φ_{k+l}` check.
const SHIFT_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Last quartile non-increasing and below the first value (or zero).
    Decreasing,
    Stagnant,
}

impl Trend {
    pub fn of(trace: &[f64]) -> Self {
        let Some(&last) = trace.last() else {
            return Trend::Stagnant;
        };
        let tail = &trace[(trace.len() * 3 / 4).min(trace.len().saturating_sub(2))..];
        let monotone = tail.windows(2).all(|w| w[1] <= w[0] + TREND_SLACK);
        if monotone && (last == 0.0 || last < trace[0]) {
            Trend::Decreasing
        } else {
            Trend::Stagnant
        }
    }
}

/// Sampled limit retraction `ρ = lim_j φ_{kj}`, represented by its recipe
/// `ρ ≈ φ_{k·depth}` together with diagnostics on the grid.
#[derive(Clone, Debug)]
pub struct RetractionEstimate {
    pub period: u32,
    pub depth: usize,
    /// `(z, ρ(z))` for every grid point.
    pub samples: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    /// `sup_grid β(φ_{kj}(z), ρ(z))` for `j = 1..=depth`.
    pub bergman_sup_trace: Vec<f64>,
    pub trend: Trend,
    /// `max β(ρ(ρ(z)), ρ(z))` over the samples.
    pub idempotency_residual: f64,
    /// `max |ρ(φ_l(z)) - ρ(φ_{k+l}(z))|` for `l < k` on a subsample.
    pub shift_residual: f64,
    /// `max |φ_{k·depth}(z) - φ_{k(depth-1)}(z)|`.
    pub last_step: f64,
    map: HoloMap,
}

impl RetractionEstimate {
    pub fn map(&self) -> &HoloMap {
        &self.map
    }

    /// `ρ(z) ≈ φ_{k·depth}(z)`.
    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>, MapError> {
        PowerCache::new(&self.map).iterate_raw(self.period as u64 * self.depth as u64, z)
    }
}

struct PointTrace {
    rho: Vec<Complex64>,
    betas: Vec<f64>,
    last_step: f64,
}

fn trace_point(map: &HoloMap, k: u64, depth: usize, z: &[Complex64]) -> Result<PointTrace, MapError> {
    let mut cache = PowerCache::new(map);
    let mut path = Vec::with_capacity(depth);
    let mut w = z.to_vec();
    for _ in 0..depth {
        w = cache.iterate_raw(k, &w)?;
        path.push(w.clone());
    }
    let rho = path[depth - 1].clone();
    let last_step = if depth >= 2 {
        distance(&path[depth - 1], &path[depth - 2])
    } else {
        distance(&path[0], z)
    };
    let betas = path.iter().map(|p| bergman_distance_raw(p, &rho)).collect();
    Ok(PointTrace {
        rho,
        betas,
        last_step,
    })
}

/// Estimates `ρ = lim φ_{kj}` on the grid and reports the Bergman sup trace
/// `sup_grid β(φ_{kj}(z), ρ(z))`, idempotency and shift invariance.
pub fn estimate_retraction(
    map: &HoloMap,
    k: u32,
    j_max: usize,
    grid: &GridSpec,
    tol: f64,
) -> Result<RetractionEstimate, DynamicsError> {
    let depth = j_max.max(2);
    let kk = k.max(1) as u64;
    let points = grid.points(map.dim());
    let traces: Vec<PointTrace> = points
        .par_iter()
        .map(|z| trace_point(map, kk, depth, z))
        .collect::<Result<_, _>>()?;

    let last_step = traces.iter().map(|t| t.last_step).fold(0.0, f64::max);
    if last_step > tol {
        return Err(DynamicsError::NotConverging { delta: last_step });
    }
    let bergman_sup_trace: Vec<f64> = (0..depth)
        .map(|j| traces.iter().map(|t| t.betas[j]).fold(0.0, f64::max))
        .collect();

    let mut estimate = RetractionEstimate {
        period: kk as u32,
        depth,
        samples: points
            .iter()
            .zip(&traces)
            .map(|(z, t)| (z.clone(), t.rho.clone()))
            .collect(),
        trend: Trend::of(&bergman_sup_trace),
        bergman_sup_trace,
        idempotency_residual: 0.0,
        shift_residual: 0.0,
        last_step,
        map: map.clone(),
    };

    estimate.idempotency_residual = estimate
        .samples
        .par_iter()
        .map(|(_, rho)| Ok(bergman_distance_raw(&estimate.apply(rho)?, rho)))
        .collect::<Result<Vec<f64>, MapError>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let stride = (estimate.samples.len() / SHIFT_SAMPLES).max(1);
    let subsample: Vec<&Vec<Complex64>> = estimate.samples.iter().step_by(stride).map(|s| &s.0).collect();
    estimate.shift_residual = subsample
        .par_iter()
        .map(|z| -> Result<f64, MapError> {
            let mut cache = PowerCache::new(map);
            let mut worst: f64 = 0.0;
            for l in 0..kk {
                let near = estimate.apply(&cache.iterate_raw(l, z)?)?;
                let far = estimate.apply(&cache.iterate_raw(kk + l, z)?)?;
                worst = worst.max(distance(&near, &far));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>, MapError>>()?
        .into_iter()
        .fold(0.0, f64::max);

    Ok(estimate)
}

/// Bound `ω(‖B^{kj}‖)` on `sup β(A^{kj}(z), ρ(z))` for a matrix symbol, where
/// `B` is the Schur block of `A` on the attracting subspace. Zero when the
/// spectrum lies on the circle; infinite when `‖B^{kj}‖ >= 1`.
pub fn contracting_block_bound(a: &CMatrix, k: u32, j: u64) -> Result<f64, DynamicsError> {
    let Some(b) = contracting_block(a, DEFAULT_MODULUS_TOL)? else {
        return Ok(0.0);
    };
    let norm = singular_values(&matrix_power(&b, k as u64 * j))?[0];
    Ok(poincare_omega(norm).unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mixed_diagonal_retracts_onto_first_axis() {
        let grid = GridSpec::geometric(12, 6, 5);
        let map = HoloMap::linear(CMatrix::diag(&[c(0.0, 1.0), c(0.5, 0.0)])).unwrap();
        let rho = estimate_retraction(&map, 4, 32, &grid, 1e-8).unwrap();
        for (z, r) in &rho.samples {
            assert!(distance(r, &[z[0], c(0.0, 0.0)]) < 1e-6);
        }
        assert!(rho.idempotency_residual < 1e-8);
        assert!(rho.shift_residual < 1e-12);
        assert_eq!(rho.trend, Trend::Decreasing);
        for (j, &b) in rho.bergman_sup_trace.iter().enumerate() {
            let bound = contracting_block_bound(&map_matrix(&map), 4, j as u64 + 1).unwrap();
            assert!(b <= bound + 1e-6, "j = {}: {b} > {bound}", j + 1);
        }
    }

    fn map_matrix(m: &HoloMap) -> CMatrix {
        match m {
            HoloMap::Linear(a) => a.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn contraction_and_rotation() {
        let grid = GridSpec::geometric(10, 4, 5);
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        let rho = estimate_retraction(&half, 1, 64, &grid, 1e-8).unwrap();
        assert!(rho.samples.iter().all(|(_, r)| r.iter().all(|x| x.norm() < 1e-15)));

        let rot = HoloMap::unitary(CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        let rho = estimate_retraction(&rot, 4, 8, &grid, 1e-8).unwrap();
        assert!(rho.samples.iter().all(|(z, r)| distance(z, r) < 1e-15));
        assert!(rho.bergman_sup_trace.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn slow_contraction_is_not_converged() {
        let grid = GridSpec::geometric(20, 2, 5);
        let slow = HoloMap::linear(CMatrix::identity(2).scale(c(0.999, 0.0))).unwrap();
        assert!(matches!(
            estimate_retraction(&slow, 1, 8, &grid, 1e-8),
            Err(DynamicsError::NotConverging { .. })
        ));
    }

    #[test]
    fn trend_classification() {
        assert_eq!(Trend::of(&[1.0, 0.5, 0.25, 0.1]), Trend::Decreasing);
        assert_eq!(Trend::of(&[0.0, 0.0, 0.0, 0.0]), Trend::Decreasing);
        assert_eq!(Trend::of(&[1.0, 1.0, 1.0, 1.0]), Trend::Stagnant);
        assert_eq!(Trend::of(&[1.0, 0.5, 0.2, 0.3]), Trend::Stagnant);
    }
}
