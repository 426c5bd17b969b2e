use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::ErgodicityError;
use crate::linalg::vector::distance;
use crate::maps::{GridSpec, HoloMap};

/// Default gap between the grid estimate of `‖φ_{j_0}‖_∞` and 1.
pub const DEFAULT_CERT_MARGIN: f64 = 0.05;
/// Relative agreement of the two outermost rungs for a resolved sup.
const RUNG_AGREEMENT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileStatus {
    /// The two outermost rungs agree: the sup is attained inside the grid.
    Resolved,
    /// The profile still changes at the outermost rung.
    Unresolved,
}

/// `S_j(r) = max_{|z| = r on the grid} |φ_j(z) - a|` for every rung `r` and
/// `j = 1..=j_max`.
#[derive(Clone, Debug, Serialize)]
pub struct SupProfiles {
    pub radii: Vec<f64>,
    /// `profiles[j - 1][rung]`.
    pub profiles: Vec<Vec<f64>>,
    pub status: Vec<ProfileStatus>,
}

impl SupProfiles {
    /// Grid lower bound `sup_grid |φ_j - a|` for `j = 1..=j_max`.
    pub fn trace(&self) -> Vec<f64> {
        self.profiles
            .iter()
            .map(|p| p.iter().copied().fold(0.0, f64::max))
            .collect()
    }

    /// True when the outer deficit `1 - S_j` shrinks at least like the square
    /// root of the radial deficit `1 - r`: the sup is still climbing to 1.
    pub fn approaches_sphere(&self, j: usize) -> bool {
        let (p, m) = (&self.profiles[j - 1], self.radii.len());
        if m < 2 {
            return false;
        }
        let radial = (1.0 - self.radii[m - 1]) / (1.0 - self.radii[m - 2]);
        let outer = 1.0 - p[m - 1];
        let inner = 1.0 - p[m - 2];
        inner > 0.0 && outer <= radial.sqrt() * inner
    }
}

fn classify(profile: &[f64], previous: Option<ProfileStatus>) -> ProfileStatus {
    let m = profile.len();
    if m < 2 {
        return ProfileStatus::Unresolved;
    }
    let (outer, inner) = (profile[m - 1], profile[m - 2]);
    if outer == 0.0 && inner == 0.0 {
        // Underflow cannot be told from collapse unless the previous iterate
        // was already resolved.
        return match previous {
            None | Some(ProfileStatus::Resolved) => ProfileStatus::Resolved,
            Some(ProfileStatus::Unresolved) => ProfileStatus::Unresolved,
        };
    }
    if (outer - inner).abs() <= RUNG_AGREEMENT * outer {
        ProfileStatus::Resolved
    } else {
        ProfileStatus::Unresolved
    }
}

pub fn sup_profiles(
    map: &HoloMap,
    a: &[Complex64],
    j_max: usize,
    grid: &GridSpec,
) -> Result<SupProfiles, ErgodicityError> {
    let rungs = grid.rungs(map.dim());
    let per_rung: Vec<Vec<f64>> = rungs
        .par_iter()
        .map(|(_, points)| {
            let mut best = vec![0.0f64; j_max];
            for z in points {
                let mut w = z.clone();
                for b in best.iter_mut() {
                    w = map.evaluate_raw(&w)?;
                    *b = b.max(distance(&w, a));
                }
            }
            Ok(best)
        })
        .collect::<Result<_, ErgodicityError>>()?;
    let profiles: Vec<Vec<f64>> = (0..j_max).map(|j| per_rung.iter().map(|r| r[j]).collect()).collect();
    let mut status = Vec::with_capacity(j_max);
    for p in &profiles {
        let s = classify(p, status.last().copied());
        status.push(s);
    }
    Ok(SupProfiles {
        radii: rungs.iter().map(|(r, _)| *r).collect(),
        profiles,
        status,
    })
}

/// Evidence that `C_φ` is quasi-compact: `‖φ_{n_0}‖_∞ < 1`, so the closure
/// of `φ_{n_0}(B_n)` is compact and `C_φ^{n_0}` is compact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiCompactCertificate {
    pub n0: usize,
    pub sup_estimate: f64,
}

/// Smallest resolved `j` whose grid sup stays below `1 - margin`.
pub fn certificate_from_profiles(profiles: &SupProfiles, margin: f64) -> Option<QuasiCompactCertificate> {
    profiles
        .trace()
        .into_iter()
        .zip(&profiles.status)
        .enumerate()
        .find(|(_, (s, st))| **st == ProfileStatus::Resolved && *s < 1.0 - margin)
        .map(|(i, (s, _))| QuasiCompactCertificate {
            n0: i + 1,
            sup_estimate: s,
        })
}

pub fn quasi_compact_certificate(
    map: &HoloMap,
    j_max: usize,
    grid: &GridSpec,
) -> Result<Option<QuasiCompactCertificate>, ErgodicityError> {
    let origin = vec![Complex64::new(0.0, 0.0); map.dim()];
    let profiles = sup_profiles(map, &origin, j_max, grid)?;
    Ok(certificate_from_profiles(&profiles, DEFAULT_CERT_MARGIN))
}
