//! Text description of maps: a tagged JSON object with `type` one of
//! `linear`, `unitary`, `involution`, `mobius`, `monomial`, `composite`.
//! Matrices are row-major lists of `[re, im]` pairs and points are lists of
//! `[re, im]`. Floats are printed in shortest round-trip form, so
//! `parse(print(map)) == map`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{HoloMap, MapError, MonomialTerm};
use crate::geometry::Point;
use crate::linalg::CMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapDescription {
    Linear {
        matrix: Vec<Vec<Complex64>>,
    },
    Unitary {
        matrix: Vec<Vec<Complex64>>,
    },
    Involution {
        a: Vec<Complex64>,
    },
    Mobius {
        u: Vec<Vec<Complex64>>,
        a: Vec<Complex64>,
    },
    Monomial {
        terms: Vec<MonomialDescription>,
    },
    Composite {
        factors: Vec<MapDescription>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialDescription {
    pub coeff: Complex64,
    pub exponents: Vec<u64>,
}

fn matrix(field: &str, rows: Vec<Vec<Complex64>>) -> Result<CMatrix, MapError> {
    CMatrix::from_rows(rows).map_err(|e| MapError::Invalid(format!("field `{field}`: {e}")))
}

fn point(field: &str, coords: Vec<Complex64>) -> Result<Point, MapError> {
    Point::new(coords).map_err(|e| MapError::Invalid(format!("field `{field}`: {e}")))
}

impl TryFrom<MapDescription> for HoloMap {
    type Error = MapError;

    fn try_from(d: MapDescription) -> Result<Self, Self::Error> {
        match d {
            MapDescription::Linear { matrix: m } => HoloMap::linear(matrix("matrix", m)?),
            MapDescription::Unitary { matrix: m } => HoloMap::unitary(matrix("matrix", m)?),
            MapDescription::Involution { a } => Ok(HoloMap::involution(point("a", a)?)),
            MapDescription::Mobius { u, a } => HoloMap::mobius(matrix("u", u)?, point("a", a)?),
            MapDescription::Monomial { terms } => HoloMap::monomial(
                terms
                    .into_iter()
                    .map(|t| MonomialTerm::new(t.coeff, t.exponents))
                    .collect(),
            ),
            MapDescription::Composite { factors } => HoloMap::composite(
                factors
                    .into_iter()
                    .map(HoloMap::try_from)
                    .collect::<Result<_, _>>()?,
            ),
        }
    }
}

impl From<HoloMap> for MapDescription {
    fn from(m: HoloMap) -> Self {
        match m {
            HoloMap::Linear(a) => MapDescription::Linear { matrix: a.rows() },
            HoloMap::Unitary(u) => MapDescription::Unitary { matrix: u.rows() },
            HoloMap::Involution(a) => MapDescription::Involution {
                a: a.into_coords(),
            },
            HoloMap::Mobius { u, a } => MapDescription::Mobius {
                u: u.rows(),
                a: a.into_coords(),
            },
            HoloMap::Monomial(terms) => MapDescription::Monomial {
                terms: terms
                    .into_iter()
                    .map(|t| MonomialDescription {
                        coeff: t.coeff,
                        exponents: t.exponents,
                    })
                    .collect(),
            },
            HoloMap::Composite(f) => MapDescription::Composite {
                factors: f.into_iter().map(MapDescription::from).collect(),
            },
        }
    }
}
