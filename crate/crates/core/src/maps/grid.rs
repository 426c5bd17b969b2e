use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::vector::{basis, norm};

pub const DEFAULT_LEVELS: u32 = 24;
pub const DEFAULT_DIRECTIONS: usize = 16;

/// Sample set for sup-norm estimates: every radius is combined with every
/// direction. The `n` coordinate axes always come first, followed by
/// `directions_per_radius` seeded random unit vectors. Directions depend only
/// on `(n, seed)` and their index, so raising either count refines the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub directions_per_radius: usize,
    pub seed: u64,
}

impl GridSpec {
    /// Radii `1 - 2^{-m}` for `m = 1..=levels`; `levels <= 52` keeps every
    /// radius strictly below 1 in double precision.
    pub fn geometric(levels: u32, directions_per_radius: usize, seed: u64) -> Self {
        let levels = levels.clamp(1, 52);
        let radii = (1..=levels).map(|m| 1.0 - (-(m as f64)).exp2()).collect();
        Self {
            radii,
            directions_per_radius,
            seed,
        }
    }

    pub fn with_radii(radii: Vec<f64>, directions_per_radius: usize, seed: u64) -> Option<Self> {
        let ok = !radii.is_empty()
            && radii.iter().all(|&r| r > 0.0 && r < 1.0)
            && radii.windows(2).all(|w| w[0] < w[1]);
        ok.then_some(Self {
            radii,
            directions_per_radius,
            seed,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }

    /// Unit directions in `C^n`: the axes, then the random ones.
    pub fn directions(&self, n: usize) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = (0..n).map(|k| basis(n, k)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (n as u64).rotate_left(32));
        while out.len() < n + self.directions_per_radius {
            let v: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let len = norm(&v);
            if len > 1e-8 {
                out.push(v.iter().map(|c| c / len).collect());
            }
        }
        out
    }

    /// All sample points, radius-major.
    pub fn points(&self, n: usize) -> Vec<Vec<Complex64>> {
        let dirs = self.directions(n);
        self.radii
            .iter()
            .flat_map(|&r| dirs.iter().map(move |d| d.iter().map(|c| c * r).collect()))
            .collect()
    }

    /// Sample points grouped by radius rung.
    pub fn rungs(&self, n: usize) -> Vec<(f64, Vec<Vec<Complex64>>)> {
        let dirs = self.directions(n);
        self.radii
            .iter()
            .map(|&r| (r, dirs.iter().map(|d| d.iter().map(|c| c * r).collect()).collect()))
            .collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::geometric(DEFAULT_LEVELS, DEFAULT_DIRECTIONS, 0)
    }
}
