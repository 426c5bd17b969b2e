//! Complex Schur decomposition `M = Q T Q*` via Householder reduction to
//! Hessenberg form followed by single-shift QR with Wilkinson shifts.

use num_complex::Complex64;

use super::{CMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `matrix = q * t * q^*` with `t` upper triangular and `q` unitary.
#[derive(Clone, Debug)]
pub struct Schur {
    pub t: CMatrix,
    pub q: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.dim()).map(|i| self.t[(i, i)]).collect()
    }

    /// Moves the diagonal entries selected by `keep_first` to the leading
    /// positions, preserving the relative order within each group. Returns the
    /// number of selected entries. The leading `k` Schur vectors then span the
    /// invariant subspace of the selected eigenvalues.
    pub fn reorder<F>(&mut self, keep_first: F) -> usize
    where
        F: Fn(Complex64) -> bool,
    {
        let n = self.t.dim();
        let mut placed = 0;
        for i in 0..n {
            if keep_first(self.t[(i, i)]) {
                let mut k = i;
                while k > placed {
                    self.swap_adjacent(k - 1);
                    k -= 1;
                }
                placed += 1;
            }
        }
        placed
    }

    /// Exchanges the diagonal entries at `k` and `k + 1` by a unitary
    /// similarity.
    fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.dim();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        rotate_rows(&mut self.t, k, c, s, 0);
        rotate_cols(&mut self.t, k, c, s, n);
        rotate_cols(&mut self.q, k, c, s, n);
        self.t[(k + 1, k)] = ZERO;
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
    }
}

/// Rotation `(c, s)` with `c` real such that
/// `[c, s; -conj(s), c] * [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Applies the rotation from the left to rows `k, k+1`, columns `from..n`.
fn rotate_rows(m: &mut CMatrix, k: usize, c: f64, s: Complex64, from: usize) {
    for j in from..m.dim() {
        let x = m[(k, j)];
        let y = m[(k + 1, j)];
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = -s.conj() * x + y * c;
    }
}

/// Applies the adjoint rotation from the right to columns `k, k+1`, rows
/// `0..upto`.
fn rotate_cols(m: &mut CMatrix, k: usize, c: f64, s: Complex64, upto: usize) {
    for i in 0..upto {
        let x = m[(i, k)];
        let y = m[(i, k + 1)];
        m[(i, k)] = x * c + y * s.conj();
        m[(i, k + 1)] = -x * s + y * c;
    }
}

fn hessenberg(m: &CMatrix) -> (CMatrix, CMatrix) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // H <- (I - 2vv*) H
        for j in 0..n {
            let dot: Complex64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        // H <- H (I - 2vv*), Q <- Q (I - 2vv*)
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex64 = (0..v.len()).map(|l| target[(i, k + 1 + l)] * v[l]).sum();
                for l in 0..v.len() {
                    target[(i, k + 1 + l)] -= dot * v[l].conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let mu1 = half_tr + disc;
    let mu2 = half_tr - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Complex Schur decomposition.
pub fn schur(m: &CMatrix) -> Result<Schur, LinalgError> {
    let n = m.dim();
    let (mut h, mut q) = hessenberg(m);
    let eps = f64::EPSILON;
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let budget = 60 * n * n.max(2);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local || sub <= eps * scale * 1e-3 {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > budget {
            return Err(LinalgError::NonConvergence { iterations: total });
        }

        let mu = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.3 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotate_rows(&mut h, k, c, s, k);
            h[(k + 1, k)] = ZERO;
            rotations.push((k, c, s));
        }
        for &(k, c, s) in &rotations {
            rotate_cols(&mut h, k, c, s, (k + 2).min(hi) + 1);
            rotate_cols(&mut q, k, c, s, n);
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }

    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t: h, q })
}

/// All `n` eigenvalues with multiplicity, in Schur-diagonal order.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, LinalgError> {
    Ok(schur(m)?.eigenvalues())
}
