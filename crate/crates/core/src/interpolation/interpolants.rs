use num_complex::Complex64;
use rayon::prelude::*;

use super::{separation_products, InterpolationError, NodeSequence};
use crate::geometry::involution_raw;
use crate::linalg::vector::{inner, norm};
use crate::maps::GridSpec;

/// Separation constants below this make the `1/δ` bounds meaningless.
pub const MIN_SEPARATION: f64 = 1e-6;

/// `f_l(z) = Π_{j ≠ l} <φ_{x_j}(z), v_{j,l}> / |φ_{x_j}(x_l)|` with
/// `v_{j,l} = φ_{x_j}(x_l)/|φ_{x_j}(x_l)|`. Each factor vanishes at `x_j` and
/// equals 1 at `x_l`, and `|<φ_{x_j}(z), v>| < 1`, so `‖f_l‖_∞ <= 1/δ_l`.
#[derive(Clone, Debug)]
pub struct Interpolants {
    nodes: Vec<Vec<Complex64>>,
    /// `directions[l][j] = v_{j,l}`, unused on the diagonal.
    directions: Vec<Vec<Vec<Complex64>>>,
    /// `products[l] = Π_{j ≠ l} |φ_{x_j}(x_l)|`.
    products: Vec<f64>,
    pub delta_min: f64,
}

pub fn build_interpolants(seq: &NodeSequence) -> Result<Interpolants, InterpolationError> {
    let delta_min = separation_products(seq, seq.len())?.delta_min;
    if delta_min < MIN_SEPARATION {
        return Err(InterpolationError::SeparationTooSmall(delta_min));
    }
    let nodes: Vec<Vec<Complex64>> = seq.points().iter().map(|p| p.coords().to_vec()).collect();
    let m = nodes.len();
    let mut directions = vec![vec![Vec::new(); m]; m];
    let mut products = vec![1.0; m];
    for l in 0..m {
        for j in 0..m {
            if j == l {
                continue;
            }
            let w = involution_raw(&nodes[j], &nodes[l])?;
            let len = norm(&w);
            products[l] *= len;
            directions[l][j] = w.iter().map(|c| c / len).collect();
        }
    }
    Ok(Interpolants {
        nodes,
        directions,
        products,
        delta_min,
    })
}

impl Interpolants {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<Complex64>] {
        &self.nodes
    }

    /// Upper bound `1/Π_{j ≠ l} |φ_{x_j}(x_l)|` for `‖f_l‖_∞`.
    pub fn norm_bound(&self, l: usize) -> f64 {
        1.0 / self.products[l]
    }

    /// `(f_1(z), ..., f_m(z))`, sharing the `m` involutions across functions.
    pub fn eval_all(&self, z: &[Complex64]) -> Result<Vec<Complex64>, InterpolationError> {
        let images = self
            .nodes
            .iter()
            .map(|x| involution_raw(x, z))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..self.len())
            .map(|l| {
                let mut acc = Complex64::new(1.0, 0.0);
                for (j, w) in images.iter().enumerate() {
                    if j != l {
                        acc *= inner(w, &self.directions[l][j]);
                    }
                }
                acc / self.products[l]
            })
            .collect())
    }

    pub fn eval(&self, l: usize, z: &[Complex64]) -> Result<Complex64, InterpolationError> {
        Ok(self.eval_all(z)?[l])
    }

    /// `max_{l,j} |f_l(x_j) - δ_{lj}|`.
    pub fn kronecker_error(&self) -> Result<f64, InterpolationError> {
        let mut worst: f64 = 0.0;
        for (j, x) in self.nodes.iter().enumerate() {
            for (l, v) in self.eval_all(x)?.into_iter().enumerate() {
                let target = if l == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        Ok(worst)
    }

    /// `sup_grid |f_l|` for each `l`, and `S = sup_grid Σ_l |f_l|`.
    pub fn grid_sups(&self, grid: &GridSpec) -> Result<(Vec<f64>, f64), InterpolationError> {
        let m = self.len();
        let values: Vec<Vec<f64>> = grid
            .points(self.nodes[0].len())
            .par_iter()
            .map(|z| Ok(self.eval_all(z)?.iter().map(|v| v.norm()).collect()))
            .collect::<Result<_, InterpolationError>>()?;
        let mut sups = vec![0.0f64; m];
        let mut sum_sup: f64 = 0.0;
        for row in &values {
            for (s, v) in sups.iter_mut().zip(row) {
                *s = s.max(*v);
            }
            sum_sup = sum_sup.max(row.iter().sum());
        }
        Ok((sups, sum_sup))
    }
}
