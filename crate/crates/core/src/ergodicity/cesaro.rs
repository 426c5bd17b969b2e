use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{ErgodicityError, FunctionDictionary, TestFunction};
use crate::geometry::{BoundaryPoint, Point};
use crate::maps::{GridSpec, HoloMap, PowerCache};

/// Candidate limit `P` of the Cesàro means `M_j(C_φ)`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitOperator {
    Identity,
    /// `K_a f = f(a)`.
    Evaluation(Point),
    /// `(1/k) Σ_{i<k} C_{ρ∘φ_i}` with `ρ ≈ φ_{k·depth}`; `depth = 0` takes
    /// `ρ = id`, which is exact when `φ_k = id`.
    Averaged {
        #[serde(skip)]
        map: HoloMap,
        period: u32,
        depth: usize,
    },
    /// `f ↦ f(ζ)` for functions continuous up to the sphere.
    BoundaryEvaluation(BoundaryPoint),
}

impl LimitOperator {
    pub fn describe(&self) -> String {
        let fmt = |v: &[Complex64]| {
            let parts: Vec<String> = v.iter().map(|c| format!("{:.6}{:+.6}i", c.re, c.im)).collect();
            format!("({})", parts.join(", "))
        };
        match self {
            LimitOperator::Identity => "identity".into(),
            LimitOperator::Evaluation(a) => format!("evaluation K_a at a = {}", fmt(a.coords())),
            LimitOperator::Averaged { period, .. } => {
                format!("averaged projection (1/k) sum_(i<k) C_(rho o phi_i), k = {period}")
            }
            LimitOperator::BoundaryEvaluation(z) => format!("boundary evaluation at {}", fmt(z.coords())),
        }
    }

    /// Points `w` such that `(P f)(z)` is the mean of `f(w)`.
    fn nodes(&self, z: &[Complex64], cache: &mut Option<PowerCache>) -> Result<Vec<Vec<Complex64>>, ErgodicityError> {
        Ok(match self {
            LimitOperator::Identity => vec![z.to_vec()],
            LimitOperator::Evaluation(a) => vec![a.coords().to_vec()],
            LimitOperator::BoundaryEvaluation(zeta) => vec![zeta.coords().to_vec()],
            LimitOperator::Averaged { map, period, depth } => {
                let cache = cache.get_or_insert_with(|| PowerCache::new(map));
                let k = (*period).max(1);
                let mut w = cache.iterate_raw(k as u64 * *depth as u64, z)?;
                let mut out = Vec::with_capacity(k as usize);
                for _ in 0..k {
                    out.push(w.clone());
                    w = map.evaluate_raw(&w)?;
                }
                out
            }
        })
    }

    /// `(P f)(z)` for each dictionary function.
    fn apply_all(
        &self,
        fs: &[&TestFunction],
        z: &[Complex64],
        cache: &mut Option<PowerCache>,
    ) -> Result<Vec<Complex64>, ErgodicityError> {
        let nodes = self.nodes(z, cache)?;
        fs.iter()
            .map(|f| {
                let mut s = Complex64::new(0.0, 0.0);
                for w in &nodes {
                    s += f.eval(w)?;
                }
                Ok(s / nodes.len() as f64)
            })
            .collect()
    }
}

/// `(M_j f)(z) = (1/j) Σ_{i=1}^j f(φ_i(z))` for every grid point.
pub fn cesaro_apply(map: &HoloMap, f: &TestFunction, j: usize, grid: &GridSpec) -> Result<Vec<Complex64>, ErgodicityError> {
    let j = j.max(1);
    grid.points(map.dim())
        .par_iter()
        .map(|z| {
            let mut w = z.clone();
            let mut s = Complex64::new(0.0, 0.0);
            for _ in 0..j {
                w = map.evaluate_raw(&w)?;
                s += f.eval(&w)?;
            }
            Ok(s / j as f64)
        })
        .collect()
}

/// Per-point gap profile `max_f |M_j f(z) - P f(z)| / bound(f)` for
/// `j = 1..=j_max`, with running sums along one orbit.
fn point_gaps(
    map: &HoloMap,
    limit: &LimitOperator,
    fs: &[&TestFunction],
    bounds: &[f64],
    j_max: usize,
    z: &[Complex64],
    cache: &mut Option<PowerCache>,
) -> Result<Vec<f64>, ErgodicityError> {
    let target = limit.apply_all(fs, z, cache)?;
    let mut sums = vec![Complex64::new(0.0, 0.0); fs.len()];
    let mut w = z.to_vec();
    let mut gaps = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        w = map.evaluate_raw(&w)?;
        let mut worst: f64 = 0.0;
        for (i, f) in fs.iter().enumerate() {
            sums[i] += f.eval(&w)?;
            worst = worst.max((sums[i] / j as f64 - target[i]).norm() / bounds[i]);
        }
        gaps.push(worst);
    }
    Ok(gaps)
}

/// `max_f sup_grid |M_j f - P f| / bound(f)` for `j = 1..=j_max`; entry
/// `j - 1` is a lower bound for `‖M_j(C_φ) - P‖`.
pub fn cesaro_gap_trace(
    map: &HoloMap,
    limit: &LimitOperator,
    dict: &FunctionDictionary,
    j_max: usize,
    grid: &GridSpec,
) -> Result<Vec<f64>, ErgodicityError> {
    let fs: Vec<&TestFunction> = dict.entries().iter().map(|e| &e.function).collect();
    let bounds: Vec<f64> = dict.entries().iter().map(|e| e.bound).collect();
    let per_point: Vec<Vec<f64>> = grid
        .points(map.dim())
        .par_iter()
        .map_init(
            || None,
            |cache, z| point_gaps(map, limit, &fs, &bounds, j_max, z, cache),
        )
        .collect::<Result<_, _>>()?;
    Ok((0..j_max)
        .map(|j| per_point.iter().map(|g| g[j]).fold(0.0, f64::max))
        .collect())
}

/// Gap at a single `j`.
pub fn cesaro_gap(
    map: &HoloMap,
    limit: &LimitOperator,
    dict: &FunctionDictionary,
    j: usize,
    grid: &GridSpec,
) -> Result<f64, ErgodicityError> {
    let j = j.max(1);
    Ok(cesaro_gap_trace(map, limit, dict, j, grid)?[j - 1])
}

/// `max_f sup_grid |f(φ_j(z))| / bound(f)` for `j = 1..=j_max`; never above
/// one since composition does not increase the sup norm.
pub fn power_bound_trace(
    map: &HoloMap,
    dict: &FunctionDictionary,
    j_max: usize,
    grid: &GridSpec,
) -> Result<Vec<f64>, ErgodicityError> {
    let per_point: Vec<Vec<f64>> = grid
        .points(map.dim())
        .par_iter()
        .map(|z| {
            let mut w = z.clone();
            let mut out = Vec::with_capacity(j_max);
            for _ in 0..j_max {
                w = map.evaluate_raw(&w)?;
                let mut worst: f64 = 0.0;
                for e in dict.entries() {
                    worst = worst.max(e.function.eval(&w)?.norm() / e.bound);
                }
                out.push(worst);
            }
            Ok(out)
        })
        .collect::<Result<_, ErgodicityError>>()?;
    Ok((0..j_max)
        .map(|j| per_point.iter().map(|g| g[j]).fold(0.0, f64::max))
        .collect())
}
