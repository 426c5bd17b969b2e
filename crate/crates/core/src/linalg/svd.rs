//! One-sided (Hestenes) Jacobi SVD for small complex matrices.

use num_complex::Complex64;

use super::{CMatrix, LinalgError};

/// `a = u * diag(s) * v^*`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

const MAX_SWEEPS: usize = 80;

pub fn svd(a: &CMatrix) -> Result<Svd, LinalgError> {
    let n = a.dim();
    // Work at unit scale: products of tiny column norms underflow and the
    // orthogonality test below never passes.
    let scale = a.as_slice().iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let unit = if scale > 0.0 { scale } else { 1.0 };
    // Column-major working copies.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j).iter().map(|x| x / unit).collect()).collect();
    let total: f64 = cols.iter().flatten().map(|x| x.norm_sqr()).sum();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| super::vector::basis(n, j))
        .collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|c| c.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|c| c.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= f64::EPSILON * alpha.sqrt() * beta.sqrt() || g <= f64::EPSILON * f64::EPSILON * total {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut cols, &mut vcols] {
                    let (left, right) = m.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        (*x, *y) = (*x * c - *y * phase.conj() * s, *x * phase * s + *y * c);
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NonConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<(f64, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(), j))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut u = CMatrix::zeros(n);
    let mut v = CMatrix::zeros(n);
    let mut s = Vec::with_capacity(n);
    for (new_j, &(sigma, old_j)) in order.iter().enumerate() {
        s.push(sigma * scale);
        for i in 0..n {
            v[(i, new_j)] = vcols[old_j][i];
            if sigma > 0.0 {
                u[(i, new_j)] = cols[old_j][i] / sigma;
            }
        }
    }
    Ok(Svd { u, s, v })
}

/// Singular values `δ_1 >= ... >= δ_n`.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    Ok(svd(a)?.s)
}

/// Minimum-norm least-squares solution of `a x = b` through the
/// pseudo-inverse, discarding singular values below `rcond * δ_1`.
pub fn solve_least_squares(
    a: &CMatrix,
    b: &[Complex64],
    rcond: f64,
) -> Result<Vec<Complex64>, LinalgError> {
    let Svd { u, s, v } = svd(a)?;
    let n = a.dim();
    let cutoff = rcond * s.first().copied().unwrap_or(0.0);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        if s[k] <= cutoff || s[k] == 0.0 {
            continue;
        }
        let coeff: Complex64 = (0..n).map(|i| u[(i, k)].conj() * b[i]).sum::<Complex64>() / s[k];
        for i in 0..n {
            x[i] += v[(i, k)] * coeff;
        }
    }
    Ok(x)
}
