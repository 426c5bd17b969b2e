use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::InterpolationError;
use crate::geometry::{involution_raw, Point};
use crate::linalg::vector::{distance, norm};

/// Nodes closer than this are the same node.
pub const DISTINCT_TOL: f64 = 1e-12;
/// Ratios within this relative distance of the bound count as equal to it,
/// so that rounding cannot turn `ratio = a` into a pass.
const RATIO_SLACK: f64 = 1e-12;

/// Ordered, pairwise distinct interior points of one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeSequence {
    points: Vec<Point>,
    pub provenance: String,
}

impl NodeSequence {
    pub fn new(points: Vec<Point>, provenance: impl Into<String>) -> Result<Self, InterpolationError> {
        let n = points.first().ok_or(InterpolationError::Empty)?.dim();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(InterpolationError::DimensionMismatch {
                    index: i,
                    expected: n,
                    found: p.dim(),
                });
            }
            for (j, q) in points[..i].iter().enumerate() {
                if distance(p.coords(), q.coords()) <= DISTINCT_TOL {
                    return Err(InterpolationError::DegenerateNodes(j, i));
                }
            }
        }
        Ok(Self {
            points,
            provenance: provenance.into(),
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// One row per node, columns `re_1,im_1,re_2,im_2,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), InterpolationError> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (1..=self.dim())
            .flat_map(|k| [format!("re_{k}"), format!("im_{k}")])
            .collect();
        w.write_record(&header)?;
        for p in &self.points {
            let row: Vec<String> = p
                .coords()
                .iter()
                .flat_map(|c| [c.re.to_string(), c.im.to_string()])
                .collect();
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, provenance: impl Into<String>) -> Result<Self, InterpolationError> {
        let mut r = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record?;
            if record.len() % 2 != 0 || record.is_empty() {
                return Err(InterpolationError::Format(format!(
                    "row {}: expected re,im pairs, found {} fields",
                    i + 1,
                    record.len()
                )));
            }
            let values = record
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| InterpolationError::Format(format!("row {}: {e}", i + 1)))?;
            let coords = values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            points.push(Point::new(coords)?);
        }
        Self::new(points, provenance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioCheck {
    pub holds: bool,
    /// Index `j + 1` of the first pair with `(1-|x_{j+1}|)/(1-|x_j|) >= a`.
    pub first_violation: Option<usize>,
    pub max_ratio: f64,
}

/// Strict bound `(1 - |x_{j+1}|)/(1 - |x_j|) < a` along the sequence.
pub fn ratio_condition(seq: &NodeSequence, a: f64) -> RatioCheck {
    let mut first_violation = None;
    let mut max_ratio: f64 = 0.0;
    for (j, pair) in seq.points.windows(2).enumerate() {
        let ratio = (1.0 - pair[1].norm()) / (1.0 - pair[0].norm());
        max_ratio = max_ratio.max(ratio);
        if !(ratio < a * (1.0 - RATIO_SLACK)) && first_violation.is_none() {
            first_violation = Some(j + 1);
        }
    }
    RatioCheck {
        holds: first_violation.is_none(),
        first_violation,
        max_ratio,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationProducts {
    /// `Π_{j ≠ k, j < T} |φ_{x_k}(x_j)|` for `k < T`.
    pub products: Vec<f64>,
    pub delta_min: f64,
}

/// Separation products over the first `truncation` nodes.
pub fn separation_products(seq: &NodeSequence, truncation: usize) -> Result<SeparationProducts, InterpolationError> {
    let t = truncation.clamp(1, seq.len());
    let pts = &seq.points[..t];
    let products: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(k, xk)| {
            let mut prod = 1.0;
            for (j, xj) in pts.iter().enumerate() {
                if j != k {
                    prod *= norm(&involution_raw(xk.coords(), xj.coords())?);
                }
            }
            Ok(prod)
        })
        .collect::<Result<_, InterpolationError>>()?;
    if let Some(k) = products.iter().position(|&p| p == 0.0) {
        let j = (0..t)
            .find(|&j| j != k && distance(pts[j].coords(), pts[k].coords()) <= DISTINCT_TOL)
            .unwrap_or(k);
        return Err(InterpolationError::DegenerateNodes(j.min(k), j.max(k)));
    }
    let delta_min = products.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SeparationProducts { products, delta_min })
}
