use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{build_interpolants, ratio_condition, InterpolationError, Interpolants, NodeSequence};
use crate::dynamics::{boundary_dilation_ratio, estimate_retraction, DEFAULT_ETA};
use crate::ergodicity::quasi_compact_certificate;
use crate::geometry::{pseudo_hyperbolic, Point};
use crate::linalg::vector::{inner, norm};
use crate::linalg::{spectral_report, DEFAULT_MODULUS_TOL, DEFAULT_Q_MAX};
use crate::maps::{orbit, GridSpec, HoloMap};

/// Anchors satisfy `ε <= |φ_j(a_j)| <= ε + ANCHOR_BAND`.
pub const ANCHOR_BAND: f64 = 0.01;
/// Array nodes within this pseudo-hyperbolic distance share one interpolation
/// node: rows of the array revisit the same points up to rounding.
pub const MERGE_TOL: f64 = 1e-6;
/// Depth of the retraction estimate behind the dilation constant.
const RETRACTION_DEPTH: usize = 64;
const RETRACTION_TOL: f64 = 1e-8;
/// `|φ(0)|` above this means the map does not fix the origin.
const ORIGIN_TOL: f64 = 1e-10;

/// Rows `φ_1(a_j), ..., φ_j(a_j)` for anchors with `|φ_j(a_j)| >= ε`.
#[derive(Clone, Debug, Serialize)]
pub struct TriangularArray {
    pub epsilon: f64,
    pub anchors: Vec<Point>,
    /// `rows[j-1][l-1]` indexes the node standing for `φ_l(a_j)`.
    pub rows: Vec<Vec<usize>>,
    /// Distinct nodes in increasing modulus.
    pub nodes: NodeSequence,
    /// Dilation constant `A > 1` on `{|z - ρ(z)| >= η}`.
    pub dilation: f64,
    /// `a = 1/A`; consecutive nodes satisfy the ratio condition with it.
    pub ratio_bound: f64,
    pub max_ratio: f64,
    /// Largest pseudo-hyperbolic distance from an iterate to its node.
    pub merge_distance: f64,
    /// `|φ_l(a_j)| >= |φ_j(a_j)| >= ε` held for every `l <= j`.
    pub schwarz_chain: bool,
}

fn radial_value(map: &HoloMap, j: usize, d: &[Complex64], t: f64) -> Result<f64, InterpolationError> {
    let z: Vec<Complex64> = d.iter().map(|c| c * t).collect();
    Ok(norm(orbit(map, &z, j)?.last().expect("j >= 1")))
}

/// Radial bisection along the direction of the grid sample maximizing
/// `|φ_j|`, bracketed by the grid rungs.
fn find_anchor(
    map: &HoloMap,
    j: usize,
    epsilon: f64,
    radii: &[f64],
    best_dir: &[Complex64],
) -> Result<Vec<Complex64>, InterpolationError> {
    let mut lo = 0.0;
    let mut hi = None;
    for &r in radii {
        if radial_value(map, j, best_dir, r)? >= epsilon {
            hi = Some(r);
            break;
        }
        lo = r;
    }
    let mut hi = hi.ok_or(InterpolationError::SearchExhausted { row: j })?;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if radial_value(map, j, best_dir, mid)? >= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let value = radial_value(map, j, best_dir, hi)?;
    if !(value >= epsilon && value <= epsilon + ANCHOR_BAND) {
        return Err(InterpolationError::SearchExhausted { row: j });
    }
    Ok(best_dir.iter().map(|c| c * hi).collect())
}

pub fn build_triangular_array(
    map: &HoloMap,
    epsilon: f64,
    rows: usize,
    grid: &GridSpec,
) -> Result<TriangularArray, InterpolationError> {
    let n = map.dim();
    let origin = vec![Complex64::new(0.0, 0.0); n];
    let image = norm(&map.evaluate_raw(&origin)?);
    if image > ORIGIN_TOL {
        return Err(InterpolationError::Precondition(format!("|phi(0)| = {image:e}, the map must fix 0")));
    }
    let d0 = map.derivative_at(&Point::origin(n))?;
    if !spectral_report(&d0, DEFAULT_MODULUS_TOL, DEFAULT_Q_MAX)?.is_attracting() {
        return Err(InterpolationError::Precondition(
            "d_0 phi has unit-modulus eigenvalues".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || rows == 0 {
        return Err(InterpolationError::Precondition("need 0 < eps < 1 and rows >= 1".into()));
    }
    if let Some(c) = quasi_compact_certificate(map, rows, grid)? {
        return Err(InterpolationError::MapContracts {
            n0: c.n0,
            sup: c.sup_estimate,
        });
    }
    let rho = estimate_retraction(map, 1, RETRACTION_DEPTH, grid, RETRACTION_TOL)?;
    let dilation = boundary_dilation_ratio(map, &rho, DEFAULT_ETA, grid)?.min_ratio;
    if !(dilation > 1.0) {
        return Err(InterpolationError::Precondition(format!(
            "boundary dilation ratio {dilation} does not exceed 1"
        )));
    }

    let samples = grid.points(n);
    let orbits: Vec<Vec<Vec<Complex64>>> = samples
        .par_iter()
        .map(|z| orbit(map, z, rows))
        .collect::<Result<_, _>>()?;
    let mut radii = grid.radii.clone();
    radii.sort_by(f64::total_cmp);

    let mut anchors = Vec::with_capacity(rows);
    let mut raw_rows = Vec::with_capacity(rows);
    let mut schwarz_chain = true;
    for j in 1..=rows {
        let (best, _) = orbits
            .iter()
            .enumerate()
            .map(|(i, o)| (i, norm(&o[j - 1])))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let dir: Vec<Complex64> = {
            let z = &samples[best];
            let r = norm(z);
            z.iter().map(|c| c / r).collect()
        };
        let a = find_anchor(map, j, epsilon, &radii, &dir)?;
        let path = orbit(map, &a, j)?;
        let last = norm(&path[j - 1]);
        schwarz_chain &= path.iter().all(|x| norm(x) >= last - 1e-12) && last >= epsilon;
        anchors.push(Point::new(a)?);
        raw_rows.push(path);
    }

    // Merge iterates that land on the same point, then order by modulus.
    let mut reps: Vec<Point> = Vec::new();
    let mut merge_distance: f64 = 0.0;
    let mut index_rows: Vec<Vec<usize>> = Vec::with_capacity(rows);
    for path in &raw_rows {
        let mut idx = Vec::with_capacity(path.len());
        for x in path {
            let p = Point::new(x.clone())?;
            match reps
                .iter()
                .position(|q| pseudo_hyperbolic(q, &p) < MERGE_TOL)
            {
                Some(k) => {
                    merge_distance = merge_distance.max(pseudo_hyperbolic(&reps[k], &p));
                    idx.push(k);
                }
                None => {
                    reps.push(p);
                    idx.push(reps.len() - 1);
                }
            }
        }
        index_rows.push(idx);
    }
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&a, &b| reps[a].norm().total_cmp(&reps[b].norm()));
    let mut new_index = vec![0; reps.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let nodes = NodeSequence::new(order.iter().map(|&i| reps[i].clone()).collect(), "triangular array")?;
    let index_rows = index_rows
        .into_iter()
        .map(|r| r.into_iter().map(|i| new_index[i]).collect())
        .collect();

    let ratio_bound = 1.0 / dilation;
    let check = ratio_condition(&nodes, ratio_bound);
    if let Some(index) = check.first_violation {
        let p = nodes.points();
        return Err(InterpolationError::RatioViolated {
            index,
            ratio: (1.0 - p[index].norm()) / (1.0 - p[index - 1].norm()),
            bound: ratio_bound,
        });
    }
    Ok(TriangularArray {
        epsilon,
        anchors,
        rows: index_rows,
        nodes,
        dilation,
        ratio_bound,
        max_ratio: check.max_ratio,
        merge_distance,
        schwarz_chain,
    })
}

/// `f(z) = Σ_x <z, x> f_x(z)` over the array nodes, so `f(x) = |x|^2` at every
/// node and `f(0) = 0`.
#[derive(Clone, Debug)]
pub struct WitnessFunction {
    interpolants: Interpolants,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub origin_value: f64,
    /// `max_x |f(x) - |x|^2|`.
    pub node_error: f64,
    /// Largest `|f|` over grid samples and nodes.
    pub sup_grid: f64,
    pub delta_min: f64,
    /// `(1/j) Σ_l Re f(φ_l(a_j))` per row.
    pub row_means: Vec<f64>,
    /// `|M_j f(a_j) - f(0)| / sup_grid`, a lower bound for `‖M_j(C_φ) - K_0‖`.
    pub gap_lower_bounds: Vec<f64>,
}

pub fn witness_function(array: &TriangularArray) -> Result<WitnessFunction, InterpolationError> {
    Ok(WitnessFunction {
        interpolants: build_interpolants(&array.nodes)?,
    })
}

impl WitnessFunction {
    pub fn interpolants(&self) -> &Interpolants {
        &self.interpolants
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64, InterpolationError> {
        let fs = self.interpolants.eval_all(z)?;
        Ok(self
            .interpolants
            .nodes()
            .iter()
            .zip(fs)
            .map(|(x, f)| inner(z, x) * f)
            .sum())
    }

    pub fn report(&self, array: &TriangularArray, grid: &GridSpec) -> Result<WitnessReport, InterpolationError> {
        let nodes = self.interpolants.nodes();
        let n = nodes[0].len();
        let node_values = nodes
            .iter()
            .map(|x| self.eval(x))
            .collect::<Result<Vec<_>, _>>()?;
        let node_error = nodes
            .iter()
            .zip(&node_values)
            .map(|(x, v)| (v - crate::linalg::vector::norm_sqr(x)).norm())
            .fold(0.0, f64::max);
        let grid_sup = grid
            .points(n)
            .par_iter()
            .map(|z| Ok(self.eval(z)?.norm()))
            .collect::<Result<Vec<f64>, InterpolationError>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let sup_grid = node_values.iter().map(|v| v.norm()).fold(grid_sup, f64::max);
        let origin_value = self.eval(&vec![Complex64::new(0.0, 0.0); n])?.norm();
        let row_means: Vec<f64> = array
            .rows
            .iter()
            .map(|r| r.iter().map(|&i| node_values[i].re).sum::<f64>() / r.len() as f64)
            .collect();
        let gap_lower_bounds = array
            .rows
            .iter()
            .map(|r| {
                let mean: Complex64 = r.iter().map(|&i| node_values[i]).sum::<Complex64>() / r.len() as f64;
                (mean.norm() - origin_value).abs() / sup_grid
            })
            .collect();
        Ok(WitnessReport {
            origin_value,
            node_error,
            sup_grid,
            delta_min: self.interpolants.delta_min,
            row_means,
            gap_lower_bounds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::maps::MonomialTerm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> HoloMap {
        HoloMap::monomial(vec![
            MonomialTerm::new(c(1.0, 0.0), vec![2, 0]),
            MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
        ])
        .unwrap()
    }

    #[test]
    fn square_array_has_closed_form_anchors() {
        let grid = GridSpec::default();
        let array = build_triangular_array(&square(), 0.9, 8, &grid).unwrap();
        for (j, a) in array.anchors.iter().enumerate() {
            let expected = 0.9f64.powf(0.5f64.powi(j as i32 + 1));
            assert!((a.coords()[0] - c(expected, 0.0)).norm() < 1e-12, "row {}", j + 1);
            assert_eq!(a.coords()[1], c(0.0, 0.0));
        }
        assert_eq!(array.nodes.len(), 8);
        assert!(array.schwarz_chain);
        assert!(array.max_ratio < array.ratio_bound && array.ratio_bound < 1.0);

        let f = witness_function(&array).unwrap();
        let report = f.report(&array, &grid).unwrap();
        assert_eq!(report.origin_value, 0.0);
        assert!(report.node_error < 1e-8, "{}", report.node_error);
        assert!(report.row_means.iter().all(|&m| m >= 0.81 - 1e-8));
        for g in &report.gap_lower_bounds {
            assert!(*g >= 0.81 / report.sup_grid - 1e-3);
        }
    }

    #[test]
    fn contraction_has_no_array() {
        let half = HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        assert!(matches!(
            build_triangular_array(&half, 0.9, 4, &GridSpec::default()),
            Err(InterpolationError::MapContracts { n0: 1, .. })
        ));
    }
}
