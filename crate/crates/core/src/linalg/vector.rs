//! Helpers on complex coordinate vectors stored as slices.

use num_complex::Complex64;

/// Hermitian inner product `<z, w> = sum z_i conj(w_i)`, linear in `z`.
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    debug_assert_eq!(z.len(), w.len());
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub fn norm(z: &[Complex64]) -> f64 {
    norm_sqr(z).sqrt()
}

pub fn sub(z: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    z.iter().zip(w).map(|(a, b)| a - b).collect()
}

pub fn add(z: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    z.iter().zip(w).map(|(a, b)| a + b).collect()
}

pub fn scale(z: &[Complex64], s: Complex64) -> Vec<Complex64> {
    z.iter().map(|a| a * s).collect()
}

pub fn distance(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter()
        .zip(w)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// The `k`-th standard basis vector of `C^n`.
pub fn basis(n: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[k] = Complex64::new(1.0, 0.0);
    e
}
