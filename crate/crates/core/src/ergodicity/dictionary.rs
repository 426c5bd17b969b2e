use num_complex::Complex64;
use serde::Serialize;

use super::ErgodicityError;
use crate::geometry::{involution_raw, BoundaryPoint, Point};
use crate::linalg::vector::{basis, inner, norm};
use crate::maps::cpow;

/// One factor `<φ_b(z), u>` of an involutive product.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvolutionFactor {
    pub b: Point,
    pub u: Vec<Complex64>,
}

/// Bounded holomorphic test function on `B_n`, continuous up to the sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Constant(Complex64),
    /// `<z, u>`.
    Coordinate(Vec<Complex64>),
    /// `c z^α`.
    Monomial { coeff: Complex64, exponents: Vec<u32> },
    /// `Σ c_α z^α`.
    Polynomial(Vec<(Complex64, Vec<u32>)>),
    /// `Π <φ_b(z), u>`.
    InvolutionProduct(Vec<InvolutionFactor>),
    /// `g^m` with `g(z) = <(z_0 + z)/2, z_0>`.
    GPower { z0: BoundaryPoint, m: u64 },
}

/// `sup_{B_n} |z^α| = sqrt(Π α_k^{α_k} / |α|^{|α|})`, attained at
/// `|z_k|^2 = α_k / |α|`.
pub fn monomial_sup(exponents: &[u32]) -> f64 {
    let total: u32 = exponents.iter().sum();
    if total == 0 {
        return 1.0;
    }
    let log: f64 = exponents
        .iter()
        .filter(|&&e| e > 0)
        .map(|&e| e as f64 * (e as f64 / total as f64).ln())
        .sum();
    (0.5 * log).exp()
}

fn monomial_value(z: &[Complex64], exponents: &[u32]) -> Complex64 {
    z.iter()
        .zip(exponents)
        .map(|(&x, &e)| cpow(x, e as u64))
        .product()
}

impl TestFunction {
    /// Number of variables, or `None` for constants.
    pub fn dim(&self) -> Option<usize> {
        match self {
            TestFunction::Constant(_) => None,
            TestFunction::Coordinate(u) => Some(u.len()),
            TestFunction::Monomial { exponents, .. } => Some(exponents.len()),
            TestFunction::Polynomial(terms) => terms.first().map(|t| t.1.len()),
            TestFunction::InvolutionProduct(f) => f.first().map(|f| f.u.len()),
            TestFunction::GPower { z0, .. } => Some(z0.dim()),
        }
    }

    /// A finite upper bound for the sup norm on `B_n`; exact except for
    /// polynomials (triangle inequality) and products with non-unit `u`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TestFunction::Constant(c) => c.norm(),
            TestFunction::Coordinate(u) => norm(u),
            TestFunction::Monomial { coeff, exponents } => coeff.norm() * monomial_sup(exponents),
            TestFunction::Polynomial(terms) => terms.iter().map(|(c, e)| c.norm() * monomial_sup(e)).sum(),
            TestFunction::InvolutionProduct(factors) => factors.iter().map(|f| norm(&f.u)).product(),
            TestFunction::GPower { .. } => 1.0,
        }
    }

    /// Value at `z` in the closed ball.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64, ErgodicityError> {
        if let Some(n) = self.dim() {
            if n != z.len() {
                return Err(ErgodicityError::DimensionMismatch {
                    expected: n,
                    found: z.len(),
                });
            }
        }
        Ok(match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Coordinate(u) => inner(z, u),
            TestFunction::Monomial { coeff, exponents } => coeff * monomial_value(z, exponents),
            TestFunction::Polynomial(terms) => terms.iter().map(|(c, e)| c * monomial_value(z, e)).sum(),
            TestFunction::InvolutionProduct(factors) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors {
                    acc *= inner(&involution_raw(f.b.coords(), z)?, &f.u);
                }
                acc
            }
            TestFunction::GPower { z0, m } => {
                let g = z
                    .iter()
                    .zip(z0.coords())
                    .map(|(zi, ci)| (zi + ci) * 0.5 * ci.conj())
                    .sum::<Complex64>();
                cpow(g, *m)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DictionaryEntry {
    pub name: String,
    pub function: TestFunction,
    /// Upper bound for `‖f‖_∞`, positive and finite.
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FunctionDictionary {
    entries: Vec<DictionaryEntry>,
}

impl FunctionDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `function` with its computed sup bound. Zero functions are
    /// rejected: they carry no information and would divide by zero.
    pub fn push(&mut self, name: impl Into<String>, function: TestFunction) -> Result<(), ErgodicityError> {
        let name = name.into();
        let bound = function.sup_bound();
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(ErgodicityError::Dictionary(format!("entry `{name}` has sup bound {bound}")));
        }
        if let (Some(n), Some(m)) = (self.dim(), function.dim()) {
            if n != m {
                return Err(ErgodicityError::DimensionMismatch { expected: n, found: m });
            }
        }
        self.entries.push(DictionaryEntry { name, function, bound });
        Ok(())
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn dim(&self) -> Option<usize> {
        self.entries.iter().find_map(|e| e.function.dim())
    }

    /// Constant, coordinates, squares, `z_1 z_2`, the involutive factors
    /// `<φ_{e_k/2}(z), e_k>`, factors centred on the diagonal and the product
    /// of the coordinate factors.
    pub fn standard(n: usize) -> Self {
        let mut d = Self::new();
        let one = Complex64::new(1.0, 0.0);
        let mut push = |name: String, f: TestFunction| d.push(name, f).expect("standard entries are bounded");
        push("one".into(), TestFunction::Constant(one));
        for k in 0..n {
            push(format!("z{}", k + 1), TestFunction::Coordinate(basis(n, k)));
        }
        for k in 0..n {
            let mut e = vec![0; n];
            e[k] = 2;
            push(format!("z{}^2", k + 1), TestFunction::Monomial { coeff: one, exponents: e });
        }
        if n >= 2 {
            let mut e = vec![0; n];
            e[0] = 1;
            e[1] = 1;
            push("z1*z2".into(), TestFunction::Monomial { coeff: one, exponents: e });
        }
        let axis_factor = |k: usize| InvolutionFactor {
            b: Point::new(basis(n, k).iter().map(|c| c * 0.5).collect()).expect("interior"),
            u: basis(n, k),
        };
        for k in 0..n {
            push(format!("inv{}", k + 1), TestFunction::InvolutionProduct(vec![axis_factor(k)]));
        }
        if n >= 2 {
            let diag: Vec<Complex64> = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
            let b = Point::new(diag.iter().map(|c| c * 0.5).collect()).expect("interior");
            push(
                "inv_diag".into(),
                TestFunction::InvolutionProduct(vec![InvolutionFactor {
                    b: b.clone(),
                    u: diag.clone(),
                }]),
            );
            for k in 0..n {
                push(
                    format!("inv_diag_e{}", k + 1),
                    TestFunction::InvolutionProduct(vec![InvolutionFactor {
                        b: b.clone(),
                        u: basis(n, k),
                    }]),
                );
            }
            push(
                "inv_product".into(),
                TestFunction::InvolutionProduct((0..n).map(axis_factor).collect()),
            );
        }
        d
    }
}
