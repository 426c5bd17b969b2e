use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::certificate::{certificate_from_profiles, sup_profiles, SupProfiles, DEFAULT_CERT_MARGIN};
use super::{
    cesaro_gap_trace, ConvergenceTrace, ErgodicityError, FunctionDictionary, LimitOperator, ProfileStatus,
    QuasiCompactCertificate, TestFunction,
};
use crate::dynamics::{
    contracting_block_bound, denjoy_wolff, estimate_retraction, fixed_behavior, limit_period, DenjoyWolff,
    DynamicsError, FixedBehavior, Trend, DEFAULT_FIXED_TOL, DEFAULT_NEWTON_BUDGET,
};
use crate::geometry::{BoundaryPoint, Point};
use crate::linalg::vector::distance;
use crate::linalg::{LinalgError, SpectralReport};
use crate::maps::{conjugate_to_origin, orbit, validate_self_map, GridSpec, HoloMap};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_J_MAX: usize = 64;
pub const DEFAULT_EPSILON: f64 = 0.5;
/// Number of `g^{k_j}` witnesses built when there is no interior fixed point.
pub const DEFAULT_WITNESS_ROWS: usize = 10;
/// Step tolerance for the limit retraction of a matrix symbol.
const RETRACTION_STEP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    UniformlyMeanErgodic,
    NotMeanErgodic,
    #[serde(rename = "NotUniformlyMeanErgodic_MeanUnknown")]
    NotUniformlyMeanErgodicMeanUnknown,
    #[serde(rename = "NumericalEvidenceUME")]
    NumericalEvidenceUme,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::UniformlyMeanErgodic => "UniformlyMeanErgodic",
            Verdict::NotMeanErgodic => "NotMeanErgodic",
            Verdict::NotUniformlyMeanErgodicMeanUnknown => "NotUniformlyMeanErgodic_MeanUnknown",
            Verdict::NumericalEvidenceUme => "NumericalEvidenceUME",
            Verdict::Inconclusive => "Inconclusive",
        }
    }

    /// Everything except `Inconclusive` comes from a classification rule.
    pub fn is_definitive(self) -> bool {
        self != Verdict::Inconclusive
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The result that decided the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// A unit-modulus eigenvalue of `d_a φ` that is not a root of unity rules
    /// out mean ergodicity.
    RootOfUnityObstruction,
    /// An automorphism fixing `a` with root-of-unity spectrum is periodic.
    PeriodicAutomorphism,
    /// `φ(z) = Az` with `‖A‖ <= 1`: uniformly mean ergodic iff the spectrum
    /// lies in the disc or at roots of unity.
    MatrixSpectralRule,
    /// With spectrum in the disc, uniform mean ergodicity is equivalent to
    /// `‖φ_j - a‖_∞ → 0`.
    ContractionEquivalence,
    /// `sup β(φ_{kj}, ρ) → 0` is sufficient.
    RetractionBergmanCondition,
    /// Without an interior fixed point `C_φ` is not uniformly mean ergodic.
    NoInteriorFixedPoint,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::RootOfUnityObstruction => "root_of_unity_obstruction",
            Branch::PeriodicAutomorphism => "periodic_automorphism",
            Branch::MatrixSpectralRule => "matrix_spectral_rule",
            Branch::ContractionEquivalence => "contraction_equivalence",
            Branch::RetractionBergmanCondition => "retraction_bergman_condition",
            Branch::NoInteriorFixedPoint => "no_interior_fixed_point",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Branch::RootOfUnityObstruction => {
                "mean ergodicity forces every unit-modulus eigenvalue of d_a phi to be a root of unity"
            }
            Branch::PeriodicAutomorphism => {
                "an automorphism fixing a with root-of-unity spectrum has phi_k = id"
            }
            Branch::MatrixSpectralRule => {
                "for phi(z) = Az with ||A|| <= 1: uniformly mean ergodic iff sp A lies in the disc or at roots of unity"
            }
            Branch::ContractionEquivalence => {
                "with sp d_a phi in the disc: uniformly mean ergodic iff mean ergodic iff ||phi_j - a|| -> 0"
            }
            Branch::RetractionBergmanCondition => {
                "sup_z beta(phi_kj(z), rho(z)) -> 0 implies uniform mean ergodicity"
            }
            Branch::NoInteriorFixedPoint => "without an interior fixed point C_phi is not uniformly mean ergodic",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Threshold for "tends to 0" on the final trace value.
    pub tol: f64,
    pub j_max: usize,
    pub grid: GridSpec,
    /// Lower bound that `‖φ_j - a‖_∞` must keep for a failure certificate.
    pub epsilon: f64,
    pub margin: f64,
    pub fixed_tol: f64,
    pub newton_budget: usize,
    pub witness_rows: usize,
    /// Defaults to [`FunctionDictionary::standard`].
    pub dictionary: Option<FunctionDictionary>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            j_max: DEFAULT_J_MAX,
            grid: GridSpec::default(),
            epsilon: DEFAULT_EPSILON,
            margin: DEFAULT_CERT_MARGIN,
            fixed_tol: DEFAULT_FIXED_TOL,
            newton_budget: DEFAULT_NEWTON_BUDGET,
            witness_rows: DEFAULT_WITNESS_ROWS,
            dictionary: None,
        }
    }
}

/// One `g_j = g^{k_j}` of the no-fixed-point witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub j: usize,
    /// Radius of the excluded ball around the Denjoy-Wolff point.
    pub r: f64,
    /// `sup |g|` off that ball, `sqrt(1 - r^2/4)`.
    pub s: f64,
    /// Largest `|g|` seen on grid samples off that ball; never above `s`.
    pub s_grid: f64,
    pub k: u64,
    /// `|g_j(ζ) - (1/j) Σ_{l<=j} g_j(φ_l(0))|`, with `‖g_j‖_∞ = 1`.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErgodicVerdict {
    pub verdict: Verdict,
    pub branch: Option<Branch>,
    pub fixed_point: Option<Point>,
    pub spectrum: Vec<Complex64>,
    pub period: Option<u32>,
    pub certificate: Option<QuasiCompactCertificate>,
    #[serde(skip)]
    pub denjoy_wolff: Option<DenjoyWolff>,
    pub witness: Vec<WitnessRow>,
    pub limit: Option<LimitOperator>,
    /// Set whenever the verdict is `NotMeanErgodic`.
    pub violated_condition: Option<String>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub traces: Vec<ConvergenceTrace>,
}

fn fmt_vec(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{:.9}{:+.9}i", c.re, c.im)).collect();
    format!("({})", parts.join(", "))
}

impl ErgodicVerdict {
    fn new() -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            branch: None,
            fixed_point: None,
            spectrum: Vec::new(),
            period: None,
            certificate: None,
            denjoy_wolff: None,
            witness: Vec::new(),
            limit: None,
            violated_condition: None,
            notes: Vec::new(),
            traces: Vec::new(),
        }
    }

    fn decide(&mut self, verdict: Verdict, branch: Branch) {
        self.verdict = verdict;
        self.branch = Some(branch);
    }

    /// Plain `key: value` report, one item per line.
    pub fn render(&self) -> String {
        let mut out = format!("verdict: {}\n", self.verdict);
        match self.branch {
            Some(b) => out += &format!("branch: {b}\nstatement: {}\n", b.statement()),
            None => out += "branch: none\n",
        }
        if let Some(k) = self.period {
            out += &format!("k: {k}\n");
        }
        if let Some(a) = &self.fixed_point {
            out += &format!("fixed_point: {}\n", fmt_vec(a.coords()));
        }
        if !self.spectrum.is_empty() {
            out += &format!("spectrum: {}\n", fmt_vec(&self.spectrum));
        }
        if let Some(c) = &self.certificate {
            out += &format!("certificate: n0 = {}, sup = {:.9}\n", c.n0, c.sup_estimate);
        }
        if let Some(dw) = &self.denjoy_wolff {
            out += &format!(
                "denjoy_wolff: {} residual {:.3e} after {} steps\n",
                fmt_vec(dw.point.coords()),
                dw.residual,
                dw.steps
            );
        }
        for w in &self.witness {
            out += &format!(
                "witness: j = {}, r = {:.3e}, k = {}, gap = {:.6}\n",
                w.j, w.r, w.k, w.gap
            );
        }
        match &self.limit {
            Some(l) => out += &format!("limit: {}\n", l.describe()),
            None => out += "limit: none\n",
        }
        if let Some(v) = &self.violated_condition {
            out += &format!("violated_condition: {v}\n");
        }
        for n in &self.notes {
            out += &format!("note: {n}\n");
        }
        out
    }

    pub fn trace(&self, name: &str) -> Option<Vec<f64>> {
        self.traces
            .iter()
            .find(|t| t.names().contains(&name))
            .map(|t| t.series(name))
    }
}

pub fn classify_mean_ergodic(
    map: &HoloMap,
    tol: f64,
    grid: &GridSpec,
    j_max: usize,
) -> Result<ErgodicVerdict, ErgodicityError> {
    classify_with(
        map,
        &ClassifyOptions {
            tol,
            j_max,
            grid: grid.clone(),
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_with(map: &HoloMap, opts: &ClassifyOptions) -> Result<ErgodicVerdict, ErgodicityError> {
    validate_self_map(map, &opts.grid)?;
    let mut v = ErgodicVerdict::new();
    let behavior = match fixed_behavior(map, opts.fixed_tol, opts.newton_budget) {
        Ok(b) => b,
        Err(e @ (DynamicsError::Inconclusive { .. } | DynamicsError::NotEscaping { .. })) => {
            v.notes.push(format!("fixed-point search: {e}"));
            return Ok(v);
        }
        Err(DynamicsError::Linalg(e @ LinalgError::AmbiguousModulus { .. })) => {
            v.notes.push(format!("spectrum at the fixed point: {e}"));
            return Ok(v);
        }
        Err(e) => return Err(e.into()),
    };
    match behavior {
        FixedBehavior::NoInteriorFixed { .. } => no_fixed_point(map, opts, v),
        FixedBehavior::InteriorFixed { a, report } => interior(map, a, report, opts, v),
    }
}

/// `sqrt(1 - r^2/4) = sup{|g(z)| : |z - ζ| >= r}` for `g(z) = <(ζ+z)/2, ζ>`:
/// `|z - ζ|^2 <= 2 - 2 Re<z, ζ>` on the ball, and `|1 + w|` with `|w| <= 1`,
/// `Re w <= 1 - r^2/2` peaks on the circle.
fn log_s(r: f64) -> f64 {
    0.5 * (-0.25 * r * r).ln_1p()
}

/// Smallest `k` with `s^k < 1/2`.
fn witness_power(log_s: f64) -> u64 {
    let half = 0.5f64.ln();
    let mut k = (half / log_s).floor().max(1.0) as u64;
    while k as f64 * log_s >= half {
        k += 1;
    }
    while k > 1 && (k - 1) as f64 * log_s < half {
        k -= 1;
    }
    k
}

fn witness_rows(map: &HoloMap, zeta: &BoundaryPoint, rows: usize, grid: &GridSpec) -> Result<Vec<WitnessRow>, ErgodicityError> {
    let n = map.dim();
    let orbit = orbit(map, &vec![Complex64::new(0.0, 0.0); n], rows)?;
    let samples = grid.points(n);
    let mut out = Vec::with_capacity(rows);
    let mut nearest = f64::INFINITY;
    for j in 1..=rows {
        nearest = nearest.min(distance(&orbit[j - 1], zeta.coords()));
        let r = 0.5f64.powi(j as i32).min(0.5 * nearest);
        let ls = log_s(r);
        let k = witness_power(ls);
        let g = TestFunction::GPower { z0: zeta.clone(), m: 1 };
        let mut s_grid: f64 = 0.0;
        for z in samples.iter().filter(|z| distance(z, zeta.coords()) >= r) {
            s_grid = s_grid.max(g.eval(z)?.norm());
        }
        let gj = TestFunction::GPower { z0: zeta.clone(), m: k };
        let mut mean = Complex64::new(0.0, 0.0);
        for w in &orbit[..j] {
            mean += gj.eval(w)?;
        }
        mean /= j as f64;
        out.push(WitnessRow {
            j,
            r,
            s: ls.exp(),
            s_grid,
            k,
            gap: (gj.eval(zeta.coords())? - mean).norm(),
        });
    }
    Ok(out)
}

fn no_fixed_point(map: &HoloMap, opts: &ClassifyOptions, mut v: ErgodicVerdict) -> Result<ErgodicVerdict, ErgodicityError> {
    let dw = denjoy_wolff(map, opts.fixed_tol, opts.newton_budget)?;
    let rows = witness_rows(map, &dw.point, opts.witness_rows, &opts.grid)?;
    let gaps: Vec<f64> = rows.iter().map(|w| w.gap).collect();
    let powers: Vec<f64> = rows.iter().map(|w| w.k as f64).collect();
    v.traces.push(ConvergenceTrace::from_series("witness_gap", &gaps));
    v.traces.push(ConvergenceTrace::from_series("witness_power", &powers));
    if gaps.iter().any(|&g| g < 0.5) {
        v.notes.push("a witness gap fell below 1/2".into());
    }
    v.notes.push("mean ergodicity itself is not decided without an interior fixed point".into());
    v.denjoy_wolff = Some(dw);
    v.witness = rows;
    v.decide(Verdict::NotUniformlyMeanErgodicMeanUnknown, Branch::NoInteriorFixedPoint);
    Ok(v)
}

fn dictionary(map: &HoloMap, opts: &ClassifyOptions) -> FunctionDictionary {
    opts.dictionary
        .clone()
        .unwrap_or_else(|| FunctionDictionary::standard(map.dim()))
}

fn push_cesaro(map: &HoloMap, limit: &LimitOperator, opts: &ClassifyOptions, v: &mut ErgodicVerdict) -> Result<(), ErgodicityError> {
    let trace = cesaro_gap_trace(map, limit, &dictionary(map, opts), opts.j_max, &opts.grid)?;
    let scaled = trace
        .iter()
        .enumerate()
        .map(|(i, g)| g * (i + 1) as f64)
        .fold(0.0, f64::max);
    v.notes.push(format!("max_j j * cesaro_gap = {scaled:.6}"));
    v.traces.push(ConvergenceTrace::from_series("cesaro_gap", &trace));
    Ok(())
}

/// Grid evidence that `‖φ_j - a‖_∞ = 1` for every `j <= j_max`: each profile
/// either still climbs at the outermost rung or is resolved above `ε` with a
/// deficit that shrinks toward the sphere.
fn failure_certified(p: &SupProfiles, epsilon: f64) -> bool {
    let trace = p.trace();
    let m = p.radii.len();
    let mut resolved_high = false;
    for j in 1..=trace.len() {
        let profile = &p.profiles[j - 1];
        let ok = match p.status[j - 1] {
            ProfileStatus::Resolved => {
                let high = trace[j - 1] >= epsilon && p.approaches_sphere(j);
                resolved_high |= high;
                high
            }
            ProfileStatus::Unresolved => m >= 2 && profile[m - 1] >= profile[m - 2],
        };
        if !ok {
            return false;
        }
    }
    resolved_high
}

fn interior(
    map: &HoloMap,
    a: Point,
    report: SpectralReport,
    opts: &ClassifyOptions,
    mut v: ErgodicVerdict,
) -> Result<ErgodicVerdict, ErgodicityError> {
    v.fixed_point = Some(a.clone());
    v.spectrum = report.eigenvalues.clone();
    let bad = report.non_root_eigenvalues();
    if let Some(lambda) = bad.first() {
        v.violated_condition = Some(format!(
            "eigenvalue {:.12}{:+.12}i of d_a phi has modulus {:.12} and is not a root of unity of order <= 64",
            lambda.re,
            lambda.im,
            lambda.norm()
        ));
        v.decide(Verdict::NotMeanErgodic, Branch::RootOfUnityObstruction);
        return Ok(v);
    }
    let k = limit_period(&report)?;
    v.period = Some(k);
    let psi = conjugate_to_origin(map, &a)?;
    let origin = vec![Complex64::new(0.0, 0.0); map.dim()];

    if map.is_automorphism() {
        let limit = LimitOperator::Averaged {
            map: map.clone(),
            period: k,
            depth: 0,
        };
        push_cesaro(map, &limit, opts, &mut v)?;
        v.limit = Some(limit);
        v.decide(Verdict::UniformlyMeanErgodic, Branch::PeriodicAutomorphism);
        return Ok(v);
    }

    if let HoloMap::Linear(matrix) = map {
        let limit = LimitOperator::Averaged {
            map: map.clone(),
            period: k,
            depth: opts.j_max,
        };
        push_cesaro(map, &limit, opts, &mut v)?;
        v.notes.push(format!(
            "rho is the projection onto the unit-circle spectral subspace (dimension {}) along the attracting subspace (dimension {})",
            report.unitary_basis.len(),
            report.attracting_basis.len()
        ));
        if report.is_attracting() {
            let profiles = sup_profiles(map, &origin, opts.j_max, &opts.grid)?;
            v.traces.push(ConvergenceTrace::from_series("sup_deviation", &profiles.trace()));
            v.certificate = certificate_from_profiles(&profiles, opts.margin);
        } else {
            match estimate_retraction(map, k, opts.j_max, &opts.grid, RETRACTION_STEP_TOL) {
                Ok(est) => {
                    let bounds = (1..=est.depth as u64)
                        .map(|j| contracting_block_bound(matrix, k, j))
                        .collect::<Result<Vec<f64>, _>>()?;
                    v.traces.push(ConvergenceTrace::from_series("bergman_sup", &est.bergman_sup_trace));
                    v.traces.push(ConvergenceTrace::from_series("contracting_block_bound", &bounds));
                    v.notes.push(format!("retraction idempotency residual {:.3e}", est.idempotency_residual));
                }
                Err(DynamicsError::NotConverging { delta }) => v
                    .notes
                    .push(format!("retraction estimate still moving by {delta:.3e} at depth {}", opts.j_max)),
                Err(e) => return Err(e.into()),
            }
        }
        v.limit = Some(limit);
        v.decide(Verdict::UniformlyMeanErgodic, Branch::MatrixSpectralRule);
        return Ok(v);
    }

    if report.is_attracting() {
        let profiles = sup_profiles(&psi, &origin, opts.j_max, &opts.grid)?;
        let trace = profiles.trace();
        v.traces.push(ConvergenceTrace::from_series("sup_deviation", &trace));
        v.certificate = certificate_from_profiles(&profiles, opts.margin);
        let limit = LimitOperator::Evaluation(a.clone());
        push_cesaro(map, &limit, opts, &mut v)?;
        let last = *trace.last().unwrap_or(&f64::INFINITY);
        if v.certificate.is_some() && last < opts.tol && Trend::of(&trace) == Trend::Decreasing {
            v.limit = Some(limit);
            v.decide(Verdict::UniformlyMeanErgodic, Branch::ContractionEquivalence);
        } else if v.certificate.is_none() && failure_certified(&profiles, opts.epsilon) {
            v.violated_condition = Some(format!(
                "||phi_j - a||_inf does not tend to 0: for every j <= {} the grid sup stays >= {} or is still climbing toward the sphere, and no iterate has sup below {}",
                opts.j_max,
                opts.epsilon,
                1.0 - opts.margin
            ));
            v.decide(Verdict::NotMeanErgodic, Branch::ContractionEquivalence);
        } else {
            v.branch = Some(Branch::ContractionEquivalence);
            v.notes.push(format!(
                "sup deviation at j = {} is {last:.3e}; neither convergence nor a sup bounded away from 0 is certified",
                opts.j_max
            ));
        }
        return Ok(v);
    }

    v.branch = Some(Branch::RetractionBergmanCondition);
    match estimate_retraction(&psi, k, opts.j_max, &opts.grid, opts.tol) {
        Ok(est) => {
            let last = *est.bergman_sup_trace.last().unwrap_or(&f64::INFINITY);
            v.traces.push(ConvergenceTrace::from_series("bergman_sup", &est.bergman_sup_trace));
            if est.trend == Trend::Decreasing && last < opts.tol {
                let limit = LimitOperator::Averaged {
                    map: map.clone(),
                    period: k,
                    depth: opts.j_max,
                };
                push_cesaro(map, &limit, opts, &mut v)?;
                v.limit = Some(limit);
                v.decide(Verdict::NumericalEvidenceUme, Branch::RetractionBergmanCondition);
            } else {
                v.notes.push(format!("Bergman sup trace ends at {last:.3e}"));
            }
        }
        Err(DynamicsError::NotConverging { delta }) => {
            v.notes.push(format!("retraction estimate still moving by {delta:.3e}"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(v)
}
