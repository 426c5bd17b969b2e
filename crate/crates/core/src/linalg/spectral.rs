//! Spectral classification of derivative matrices at a fixed point: the
//! attracting / unit-circle splitting and root-of-unity orders.

use num_complex::Complex64;

use super::{schur, singular_values, CMatrix, LinalgError};

/// Default modulus tolerance for deciding `|λ| = 1`.
pub const DEFAULT_MODULUS_TOL: f64 = 1e-8;
/// Default largest root-of-unity order searched.
pub const DEFAULT_Q_MAX: u32 = 64;

/// Width, in units of `tol`, of the guard band below the unit circle in which
/// a modulus is considered too close to call.
const AMBIGUITY_BAND: f64 = 100.0;

/// Orthonormal bases of the invariant subspaces `L_N` (spectrum inside the
/// open disc) and `L_U` (spectrum on the circle).
#[derive(Clone, Debug)]
pub struct Splitting {
    pub attracting: Vec<Vec<Complex64>>,
    pub unitary: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex64>,
    pub singular_values: Vec<f64>,
    pub attracting_basis: Vec<Vec<Complex64>>,
    pub unitary_basis: Vec<Vec<Complex64>>,
    /// Each unit-modulus eigenvalue with its root-of-unity order, if any.
    pub unity_orders: Vec<(Complex64, Option<u32>)>,
}

impl SpectralReport {
    /// True when every eigenvalue lies in the open unit disc.
    pub fn is_attracting(&self) -> bool {
        self.unitary_basis.is_empty()
    }

    /// Unit-modulus eigenvalues that are not roots of unity (up to `q_max`).
    pub fn non_root_eigenvalues(&self) -> Vec<Complex64> {
        self.unity_orders
            .iter()
            .filter(|(_, q)| q.is_none())
            .map(|(l, _)| *l)
            .collect()
    }
}

enum ModulusClass {
    Inside,
    OnCircle,
}

fn classify_modulus(lambda: Complex64, tol: f64) -> Result<ModulusClass, LinalgError> {
    let modulus = lambda.norm();
    if modulus > 1.0 + tol {
        Err(LinalgError::SpectrumOutsideDisk {
            eigenvalue: lambda,
            modulus,
        })
    } else if (modulus - 1.0).abs() <= tol {
        Ok(ModulusClass::OnCircle)
    } else if modulus >= 1.0 - AMBIGUITY_BAND * tol {
        Err(LinalgError::AmbiguousModulus {
            eigenvalue: lambda,
            modulus,
        })
    } else {
        Ok(ModulusClass::Inside)
    }
}

/// Invariant splitting `C^n = L_N ⊕ L_U` of a matrix whose spectrum lies in
/// the closed unit disc.
pub fn spectral_split(m: &CMatrix, tol: f64) -> Result<Splitting, LinalgError> {
    let base = schur(m)?;
    for lambda in base.eigenvalues() {
        classify_modulus(lambda, tol)?;
    }
    let on_circle = |l: Complex64| (l.norm() - 1.0).abs() <= tol;

    let mut s = base.clone();
    let u = s.reorder(on_circle);
    let unitary = (0..u).map(|j| s.q.column(j)).collect();

    let mut s = base;
    let k = s.reorder(|l| !on_circle(l));
    let attracting = (0..k).map(|j| s.q.column(j)).collect();

    Ok(Splitting {
        attracting,
        unitary,
    })
}

/// Triangular block of `m` acting on `L_N`, expressed in an orthonormal basis.
pub fn contracting_block(m: &CMatrix, tol: f64) -> Result<Option<CMatrix>, LinalgError> {
    let mut s = schur(m)?;
    for lambda in s.eigenvalues() {
        classify_modulus(lambda, tol)?;
    }
    let k = s.reorder(|l| (l.norm() - 1.0).abs() > tol);
    Ok((k > 0).then(|| s.t.leading_block(k)))
}

/// Smallest `q <= q_max` with `|λ^q - 1| <= tol`.
pub fn root_of_unity_order(lambda: Complex64, tol: f64, q_max: u32) -> Result<Option<u32>, LinalgError> {
    let modulus = lambda.norm();
    if (modulus - 1.0).abs() > tol {
        return Err(LinalgError::NotUnitModulus {
            value: lambda,
            modulus,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let mut power = one;
    for q in 1..=q_max {
        power *= lambda;
        if (power - one).norm() <= tol {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

pub fn spectral_report(m: &CMatrix, tol: f64, q_max: u32) -> Result<SpectralReport, LinalgError> {
    let eigenvalues = schur(m)?.eigenvalues();
    let singular_values = singular_values(m)?;
    let Splitting {
        attracting,
        unitary,
    } = spectral_split(m, tol)?;
    let unity_orders = eigenvalues
        .iter()
        .filter(|l| (l.norm() - 1.0).abs() <= tol)
        .map(|&l| Ok((l, root_of_unity_order(l, tol, q_max)?)))
        .collect::<Result<Vec<_>, LinalgError>>()?;
    Ok(SpectralReport {
        eigenvalues,
        singular_values,
        attracting_basis: attracting,
        unitary_basis: unitary,
        unity_orders,
    })
}
