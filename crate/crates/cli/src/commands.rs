use anyhow::{anyhow, Context, Result};
use ball_ergodic::dynamics::{denjoy_wolff, fixed_behavior, FixedBehavior, DEFAULT_FIXED_TOL, DEFAULT_NEWTON_BUDGET};
use ball_ergodic::ergodicity::{
    cesaro_gap_trace, classify_with, power_bound_trace, ClassifyOptions, ConvergenceTrace, ErgodicVerdict,
    LimitOperator,
};
use ball_ergodic::geometry::{bergman_ball_contains, bergman_distance, pseudo_hyperbolic};
use ball_ergodic::interpolation::{
    build_interpolants, build_triangular_array, ratio_condition, separation_products, witness_function,
    InterpolationError,
};
use ball_ergodic::linalg::vector::{distance, norm};
use ball_ergodic::maps::{orbit, validate_self_map, HoloMap};
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::report::{Outcome, Report};

fn fmt_vec(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{:.12}{:+.12}i", c.re, c.im)).collect();
    format!("({})", parts.join(", "))
}

/// Map commands refuse maps that leave the ball on the grid; the error
/// carries the violating sample.
fn validated_map<'a>(cfg: &'a RunConfig, command: &str) -> Result<&'a HoloMap> {
    let map = cfg.require_map(command)?;
    validate_self_map(map, &cfg.grid_spec()).context("field `map`: not a self-map of the ball")?;
    Ok(map)
}

fn classify_verdict(cfg: &RunConfig, map: &HoloMap) -> Result<ErgodicVerdict> {
    let opts = ClassifyOptions {
        tol: cfg.tol,
        j_max: cfg.j_max,
        grid: cfg.grid_spec(),
        epsilon: cfg.epsilon,
        dictionary: Some(cfg.dictionary(map.dim())),
        ..ClassifyOptions::default()
    };
    Ok(classify_with(map, &opts)?)
}

pub fn classify(cfg: &RunConfig) -> Result<Report> {
    let map = validated_map(cfg, "classify")?;
    let v = classify_verdict(cfg, map)?;
    let mut r = Report::new("classify");
    r.raw(&v.render());
    r.traces = v.traces.clone();
    if !v.verdict.is_definitive() {
        r.outcome = Outcome::Inconclusive;
    }
    Ok(r)
}

pub fn iterate(cfg: &RunConfig) -> Result<Report> {
    let map = validated_map(cfg, "iterate")?;
    let z = cfg.start_point(map.dim())?;
    let path = orbit(map, z.coords(), cfg.j_max)?;
    let mut r = Report::new("iterate");
    r.line("start", fmt_vec(z.coords()));
    let mut norms = Vec::with_capacity(path.len());
    let mut steps = Vec::with_capacity(path.len());
    let mut prev = z.coords().to_vec();
    for (i, w) in path.iter().enumerate() {
        let n = norm(w);
        let step = distance(w, &prev);
        r.line(&format!("phi_{}", i + 1), format!("{} |z| = {n:.12}", fmt_vec(w)));
        norms.push(n);
        steps.push(step);
        prev = w.clone();
    }
    r.traces = vec![
        ConvergenceTrace::from_series("norm", &norms),
        ConvergenceTrace::from_series("step", &steps),
    ];
    Ok(r)
}

pub fn cesaro(cfg: &RunConfig) -> Result<Report> {
    let map = validated_map(cfg, "cesaro")?;
    let v = classify_verdict(cfg, map)?;
    let grid = cfg.grid_spec();
    let dict = cfg.dictionary(map.dim());
    let mut r = Report::new("cesaro");
    r.line("verdict", v.verdict);
    let limit = match (&v.limit, &v.denjoy_wolff) {
        (Some(l), _) => Some((l.clone(), "limit")),
        // Without an interior fixed point the only candidate is evaluation
        // at the Denjoy-Wolff point; the gap is measured, not asserted.
        (None, Some(dw)) => Some((LimitOperator::BoundaryEvaluation(dw.point.clone()), "candidate limit")),
        (None, None) => None,
    };
    match &limit {
        Some((l, label)) => {
            r.line(label, l.describe());
            let gaps = cesaro_gap_trace(map, l, &dict, cfg.j_max, &grid)?;
            let scaled: Vec<f64> = gaps.iter().enumerate().map(|(i, g)| g * (i + 1) as f64).collect();
            r.line("final_gap", format!("{:.6e}", gaps.last().copied().unwrap_or(f64::NAN)));
            r.line("max_j_times_gap", format!("{:.6}", scaled.iter().copied().fold(0.0, f64::max)));
            r.traces.push(ConvergenceTrace::from_series("cesaro_gap", &gaps));
            r.traces.push(ConvergenceTrace::from_series("j_times_gap", &scaled));
        }
        None => r.line("limit", "none identified"),
    }
    let powers = power_bound_trace(map, &dict, cfg.j_max, &grid)?;
    r.line("max_power_bound", format!("{:.6}", powers.iter().copied().fold(0.0, f64::max)));
    r.traces.push(ConvergenceTrace::from_series("power_bound", &powers));
    if !v.verdict.is_definitive() || limit.is_none() {
        r.outcome = Outcome::Inconclusive;
    }
    Ok(r)
}

pub fn dw(cfg: &RunConfig) -> Result<Report> {
    let map = validated_map(cfg, "dw")?;
    let mut r = Report::new("dw");
    match fixed_behavior(map, DEFAULT_FIXED_TOL, DEFAULT_NEWTON_BUDGET) {
        Ok(FixedBehavior::InteriorFixed { a, .. }) => {
            r.line("interior_fixed_point", fmt_vec(a.coords()));
            r.line("denjoy_wolff", "none (the map has an interior fixed point)");
        }
        Ok(FixedBehavior::NoInteriorFixed { .. }) => {
            let est = denjoy_wolff(map, DEFAULT_FIXED_TOL, DEFAULT_NEWTON_BUDGET)?;
            r.line("denjoy_wolff", fmt_vec(est.point.coords()));
            r.line("residual", format!("{:.3e}", est.residual));
            r.line("steps", est.steps);
            let path = orbit(map, &vec![Complex64::new(0.0, 0.0); map.dim()], est.steps)?;
            let gaps: Vec<f64> = path.iter().map(|w| distance(w, est.point.coords())).collect();
            r.traces.push(ConvergenceTrace::from_series("distance_to_boundary_point", &gaps));
        }
        Err(e) => {
            r.line("denjoy_wolff", format!("undetermined: {e}"));
            r.outcome = Outcome::Inconclusive;
        }
    }
    Ok(r)
}

pub fn metric(cfg: &RunConfig) -> Result<Report> {
    let (z, w) = cfg.metric_points()?;
    if z.dim() != w.dim() {
        return Err(anyhow!("field `points`: dimensions {} and {} differ", z.dim(), w.dim()));
    }
    let mut r = Report::new("metric");
    let beta = bergman_distance(&z, &w);
    r.line("z", fmt_vec(z.coords()));
    r.line("w", fmt_vec(w.coords()));
    r.line("pseudo_hyperbolic", format!("{:.15}", pseudo_hyperbolic(&z, &w)));
    r.line("bergman", format!("{beta:.15}"));
    if let Some(radius) = cfg.radius {
        r.line("in_bergman_ball", bergman_ball_contains(&z, radius, &w));
    }
    Ok(r)
}

pub fn interp(cfg: &RunConfig) -> Result<Report> {
    let seq = cfg.node_sequence()?;
    let mut r = Report::new("interp");
    r.line("nodes", seq.len());
    r.line("source", &seq.provenance);
    let check = ratio_condition(&seq, cfg.ratio);
    r.line("ratio_bound", cfg.ratio);
    r.line("ratio_condition", if check.holds { "holds" } else { "fails" });
    r.line("max_ratio", format!("{:.12}", check.max_ratio));
    if let Some(i) = check.first_violation {
        r.line("first_violation", i);
    }
    let deltas = (1..=seq.len())
        .map(|t| separation_products(&seq, t).map(|s| s.delta_min))
        .collect::<Result<Vec<f64>, _>>()?;
    r.line("delta_min", format!("{:.12e}", deltas.last().copied().unwrap_or(1.0)));
    r.traces.push(ConvergenceTrace::from_series("delta_min", &deltas));
    match build_interpolants(&seq) {
        Ok(f) => {
            r.line("kronecker_error", format!("{:.3e}", f.kronecker_error()?));
            let (sups, s) = f.grid_sups(&cfg.grid_spec())?;
            let worst = sups.iter().zip(0..).map(|(s, l)| s / f.norm_bound(l)).fold(0.0, f64::max);
            r.line("max_sup_over_bound", format!("{worst:.9}"));
            r.line("sum_sup", format!("{s:.9}"));
            r.traces.push(ConvergenceTrace::from_series("interpolant_sup", &sups));
        }
        Err(InterpolationError::SeparationTooSmall(d)) => {
            r.line("interpolants", format!("not built: separation {d:.3e} too small"));
            r.outcome = Outcome::Inconclusive;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

pub fn witness(cfg: &RunConfig) -> Result<Report> {
    let map = validated_map(cfg, "witness")?;
    let grid = cfg.grid_spec();
    let array = build_triangular_array(map, cfg.epsilon, cfg.rows, &grid)?;
    let f = witness_function(&array)?;
    let w = f.report(&array, &grid)?;
    let mut r = Report::new("witness");
    r.line("epsilon", array.epsilon);
    r.line("rows", array.rows.len());
    r.line("distinct_nodes", array.nodes.len());
    r.line("dilation", format!("{:.9}", array.dilation));
    r.line("ratio_bound", format!("{:.9}", array.ratio_bound));
    r.line("max_ratio", format!("{:.9}", array.max_ratio));
    r.line("merge_distance", format!("{:.3e}", array.merge_distance));
    r.line("schwarz_chain", array.schwarz_chain);
    r.line("f_at_origin", format!("{:.3e}", w.origin_value));
    r.line("node_error", format!("{:.3e}", w.node_error));
    r.line("sup_f", format!("{:.9}", w.sup_grid));
    r.line("delta_min", format!("{:.9e}", w.delta_min));
    let floor = w.gap_lower_bounds.iter().copied().fold(f64::INFINITY, f64::min);
    r.line("min_gap_lower_bound", format!("{floor:.9}"));
    for (j, a) in array.anchors.iter().enumerate() {
        r.line(&format!("anchor_{}", j + 1), fmt_vec(a.coords()));
    }
    r.traces.push(ConvergenceTrace::from_series("gap_lower_bound", &w.gap_lower_bounds));
    r.traces.push(ConvergenceTrace::from_series("row_mean", &w.row_means));
    let mut nodes = Vec::new();
    array.nodes.write_csv(&mut nodes)?;
    r.files.push(("witness_nodes.csv".into(), nodes));
    Ok(r)
}
