//! Acceptance suite: ten checks, one PASS/FAIL line each. Runs without the
//! libtest harness so that the lines are always printed.

use std::time::{Duration, Instant};

use ball_ergodic::dynamics::{
    boundary_dilation_ratio, contracting_block_bound, estimate_retraction, limit_period, DEFAULT_ETA,
};
use ball_ergodic::ergodicity::{
    bergman_pairs, cesaro_gap_trace, classify_mean_ergodic, lipschitz_ratio, quasi_compact_certificate,
    random_polynomials, Branch, FunctionDictionary, LimitOperator, Verdict, DEFAULT_J_MAX, DEFAULT_TOL,
};
use ball_ergodic::geometry::{bergman_distance_raw, involution_raw, Point};
use ball_ergodic::interpolation::{
    build_interpolants, build_triangular_array, ratio_condition, separation_products, witness_function, NodeSequence,
};
use ball_ergodic::linalg::vector::{distance, norm};
use ball_ergodic::linalg::{singular_values, spectral_report, CMatrix};
use ball_ergodic::maps::{sup_norm_deviation, validate_self_map, GridSpec, HoloMap, MonomialTerm};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform in the ball of radius `r_max`.
fn ball_point(n: usize, r_max: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    let len = norm(&v);
    let r = r_max * rng.gen_range(0.0f64..1.0).powf(1.0 / (2 * n) as f64);
    v.iter().map(|x| x * (r / len)).collect()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
        for q in &cols {
            let p: Complex64 = v.iter().zip(q).map(|(a, b)| a * b.conj()).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= p * y;
            }
        }
        let len = norm(&v);
        if len > 1e-6 {
            cols.push(v.iter().map(|x| x / len).collect());
        }
    }
    let rows = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    CMatrix::from_rows(rows).unwrap()
}

fn square_map() -> HoloMap {
    HoloMap::monomial(vec![
        MonomialTerm::new(c(1.0, 0.0), vec![2, 0]),
        MonomialTerm::new(c(0.0, 0.0), vec![0, 0]),
    ])
    .unwrap()
}

fn quarter_turn() -> HoloMap {
    HoloMap::linear(CMatrix::diag(&[c(0.0, 1.0), c(0.5, 0.0)])).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn geometry_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_identity: f64 = 0.0;
    let mut worst_invariance: f64 = 0.0;
    for _ in 0..200 {
        let a = ball_point(3, 0.99, &mut rng);
        let z = ball_point(3, 0.99, &mut rng);
        let w = ball_point(3, 0.99, &mut rng);
        let inv = |p: &[Complex64]| involution_raw(&a, p).unwrap();
        let origin = vec![c(0.0, 0.0); 3];
        worst_identity = worst_identity
            .max(distance(&inv(&inv(&z)), &z))
            .max(distance(&inv(&origin), &a))
            .max(norm(&inv(&a)));
        let moved = bergman_distance_raw(&inv(&z), &inv(&w));
        worst_invariance = worst_invariance.max((moved - bergman_distance_raw(&z, &w)).abs());
    }
    ensure(worst_identity <= 1e-10, || format!("involution identities off by {worst_identity:e}"))?;
    ensure(worst_invariance <= 1e-9, || format!("Bergman invariance off by {worst_invariance:e}"))?;

    let grid = GridSpec::geometric(12, 8, 4);
    let mut maps = Vec::new();
    while maps.len() < 20 {
        let n = rng.gen_range(2..=3);
        let map = match maps.len() % 3 {
            0 => {
                let m = CMatrix::new(n, (0..n * n).map(|_| gaussian(&mut rng)).collect()).unwrap();
                let s = rng.gen_range(0.3..1.0) / singular_values(&m).unwrap()[0];
                HoloMap::linear(m.scale(c(s, 0.0))).unwrap()
            }
            1 => {
                let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = weights.iter().map(|w| w * w).sum::<f64>().sqrt() * rng.gen_range(1.0..1.5);
                HoloMap::monomial(
                    (0..n)
                        .map(|k| {
                            let e = (0..n).map(|_| rng.gen_range(0..3)).collect();
                            MonomialTerm::new(Complex64::from_polar(weights[k] / total, rng.gen_range(0.0..6.3)), e)
                        })
                        .collect(),
                )
                .unwrap()
            }
            _ => {
                let m = CMatrix::new(n, (0..n * n).map(|_| gaussian(&mut rng)).collect()).unwrap();
                let s = rng.gen_range(0.3..0.95) / singular_values(&m).unwrap()[0];
                let b = HoloMap::involution(Point::new(ball_point(n, 0.8, &mut rng)).unwrap());
                let d = HoloMap::involution(Point::new(ball_point(n, 0.8, &mut rng)).unwrap());
                HoloMap::composite(vec![b, HoloMap::linear(m.scale(c(s, 0.0))).unwrap(), d]).unwrap()
            }
        };
        if !map.is_automorphism() && validate_self_map(&map, &grid).is_ok() {
            maps.push(map);
        }
    }
    let mut worst_excess = f64::NEG_INFINITY;
    for map in &maps {
        let n = map.dim();
        for _ in 0..500 {
            let z = ball_point(n, 0.99, &mut rng);
            let w = ball_point(n, 0.99, &mut rng);
            let before = bergman_distance_raw(&z, &w);
            let after = bergman_distance_raw(&map.evaluate_raw(&z).unwrap(), &map.evaluate_raw(&w).unwrap());
            worst_excess = worst_excess.max(after - before);
        }
    }
    ensure(worst_excess <= 1e-9, || format!("contraction violated by {worst_excess:e}"))?;
    within(Duration::from_secs(5), start)?;
    Ok(format!(
        "identities {worst_identity:.1e}, invariance {worst_invariance:.1e}, max beta excess {worst_excess:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn lipschitz_estimate() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::default();
    let fs = random_polynomials(2, 50, 3, 21);
    let pairs = bergman_pairs(2, 2000, 1.0, 22);
    let half = lipschitz_ratio(&fs, &pairs[..1000], &grid).map_err(|e| e.to_string())?;
    let full = lipschitz_ratio(&fs, &pairs, &grid).map_err(|e| e.to_string())?;
    let change = (full.max_ratio - half.max_ratio) / half.max_ratio;
    ensure(full.max_ratio.is_finite(), || "unbounded ratio".into())?;
    ensure(change < 0.05, || {
        format!("max ratio moved {:.3} -> {:.3} ({:.1}%)", half.max_ratio, full.max_ratio, 100.0 * change)
    })?;
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "max ratio {:.4} (1000 pairs) vs {:.4} (2000 pairs), {:.2?}",
        half.max_ratio,
        full.max_ratio,
        start.elapsed()
    ))
}

enum Planted {
    Root(u32, u32),
    NonRoot(f64),
    Interior(Complex64),
}

fn planted_matrix(rng: &mut ChaCha8Rng) -> (CMatrix, bool) {
    let n = rng.gen_range(1..=4);
    let mut unit = Vec::new();
    let mut inner = Vec::new();
    let mut ergodic = true;
    for _ in 0..n {
        match rng.gen_range(0..3) {
            0 => {
                let q = rng.gen_range(1..=12);
                unit.push(Planted::Root(rng.gen_range(0..q), q));
            }
            1 => loop {
                let theta: f64 = rng.gen_range(0.0..1.0);
                let lambda = Complex64::from_polar(1.0, std::f64::consts::TAU * theta);
                if (1..=64).all(|q| (lambda.powu(q) - 1.0).norm() > 1e-5) {
                    unit.push(Planted::NonRoot(theta));
                    ergodic = false;
                    break;
                }
            },
            _ => inner.push(Planted::Interior(Complex64::from_polar(
                rng.gen_range(0.0..0.9),
                rng.gen_range(0.0..std::f64::consts::TAU),
            ))),
        }
    }
    let s = unit.len();
    let mut d = CMatrix::zeros(n);
    for (i, p) in unit.iter().chain(&inner).enumerate() {
        let lambda = match *p {
            Planted::Root(p, q) => Complex64::from_polar(1.0, std::f64::consts::TAU * p as f64 / q as f64),
            Planted::NonRoot(theta) => Complex64::from_polar(1.0, std::f64::consts::TAU * theta),
            Planted::Interior(l) => l,
        };
        d[(i, i)] = lambda;
    }
    // Nilpotent coupling inside the attracting block, shrunk until the block
    // is a contraction.
    let mut t = d.clone();
    for i in s..n {
        for j in i + 1..n {
            t[(i, j)] = gaussian(rng) * 0.3;
        }
    }
    while singular_values(&t).unwrap()[0] > 1.0 + 1e-12 {
        for i in s..n {
            for j in i + 1..n {
                t[(i, j)] *= 0.5;
            }
        }
    }
    let q = random_unitary(n, rng);
    (q.mul(&t).mul(&q.adjoint()), ergodic)
}

fn linear_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let grid = GridSpec::default();
    let mut agree = 0;
    let (mut yes, mut no) = (0, 0);
    let mut first_miss = None;
    for case in 0..100 {
        let (m, ergodic) = planted_matrix(&mut rng);
        let map = HoloMap::linear(m.clone()).map_err(|e| format!("case {case}: {e}"))?;
        let v = classify_mean_ergodic(&map, DEFAULT_TOL, &grid, DEFAULT_J_MAX)
            .map_err(|e| format!("case {case}: {e}; matrix {:?}", m.rows()))?;
        let expected = if ergodic { Verdict::UniformlyMeanErgodic } else { Verdict::NotMeanErgodic };
        if ergodic {
            yes += 1;
        } else {
            no += 1;
        }
        if v.verdict == expected {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(format!("case {case}: expected {expected}, got {}", v.verdict));
        }
    }
    ensure(agree == 100, || format!("{agree}/100 agree; {}", first_miss.unwrap_or_default()))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!("100/100 agree ({yes} ergodic, {no} not), {:.2?}", start.elapsed()))
}

fn periodic_average() -> Outcome {
    let map = quarter_turn();
    let grid = GridSpec::default();
    let HoloMap::Linear(a) = &map else { unreachable!() };
    let k = limit_period(&spectral_report(a, 1e-8, 64).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(k == 4, || format!("k = {k}"))?;
    let limit = LimitOperator::Averaged {
        map: map.clone(),
        period: k,
        depth: DEFAULT_J_MAX,
    };
    let trace = cesaro_gap_trace(&map, &limit, &FunctionDictionary::standard(2), 200, &grid).map_err(|e| e.to_string())?;
    let worst = trace
        .iter()
        .enumerate()
        .map(|(i, g)| g * (i + 1) as f64)
        .fold(0.0, f64::max);
    ensure(worst <= 2.0, || format!("max j*gap = {worst}"))?;
    let rho = estimate_retraction(&map, k, DEFAULT_J_MAX, &grid, 1e-8).map_err(|e| e.to_string())?;
    let mismatch = rho
        .samples
        .iter()
        .map(|(z, r)| distance(r, &[z[0], c(0.0, 0.0)]))
        .fold(0.0, f64::max);
    ensure(mismatch <= 1e-6, || format!("retraction off (z1, 0) by {mismatch:e}"))?;
    ensure(rho.idempotency_residual <= 1e-8, || {
        format!("idempotency residual {:e}", rho.idempotency_residual)
    })?;
    Ok(format!(
        "k = 4, max j*gap {worst:.4} over j <= 200, retraction error {mismatch:.1e}, idempotency {:.1e}",
        rho.idempotency_residual
    ))
}

fn contraction_branch() -> Outcome {
    let grid = GridSpec::default();
    let linear = HoloMap::linear(CMatrix::diag(&[c(0.5, 0.0), c(0.3, 0.0)])).unwrap();
    let nonlinear = HoloMap::monomial(vec![
        MonomialTerm::new(c(0.5, 0.0), vec![1, 0]),
        MonomialTerm::new(c(0.3, 0.0), vec![0, 1]),
    ])
    .unwrap();
    for map in [&linear, &nonlinear] {
        let v = classify_mean_ergodic(map, DEFAULT_TOL, &grid, DEFAULT_J_MAX).map_err(|e| e.to_string())?;
        ensure(v.verdict == Verdict::UniformlyMeanErgodic, || format!("verdict {}", v.verdict))?;
        ensure(v.certificate.as_ref().map(|c| c.n0) == Some(1), || format!("certificate {:?}", v.certificate))?;
        let trace = v.trace("sup_deviation").ok_or("no sup trace")?;
        for (i, t) in trace.iter().enumerate() {
            let expected = 0.5f64.powi(i as i32 + 1) * grid.r_max();
            ensure((t - expected).abs() <= 1e-9, || format!("sup trace j = {}: {t} vs {expected}", i + 1))?;
        }
    }
    let v = classify_mean_ergodic(&nonlinear, DEFAULT_TOL, &grid, DEFAULT_J_MAX).map_err(|e| e.to_string())?;
    ensure(v.branch == Some(Branch::ContractionEquivalence), || format!("branch {:?}", v.branch))?;
    let origin = Point::origin(2);
    for j in [1u64, 2, 5, 17] {
        let d = sup_norm_deviation(&linear, &origin, j, &grid).map_err(|e| e.to_string())?;
        let expected = 0.5f64.powi(j as i32) * grid.r_max();
        ensure((d - expected).abs() <= 1e-9, || format!("deviation j = {j}: {d}"))?;
    }
    let k0 = LimitOperator::Evaluation(origin);
    let trace = cesaro_gap_trace(&linear, &k0, &FunctionDictionary::standard(2), 200, &grid).map_err(|e| e.to_string())?;
    let worst = trace
        .iter()
        .enumerate()
        .map(|(i, g)| g * (i + 1) as f64)
        .fold(0.0, f64::max);
    ensure(worst <= 2.0, || format!("max j*gap = {worst}"))?;
    let cert = quasi_compact_certificate(&linear, DEFAULT_J_MAX, &grid).map_err(|e| e.to_string())?;
    ensure(cert.as_ref().map(|c| c.n0) == Some(1), || format!("certificate {cert:?}"))?;
    Ok(format!("UME via matrix and contraction branches, n0 = 1, max j*gap {worst:.4}"))
}

fn failure_branch() -> Outcome {
    let grid = GridSpec::default();
    let map = square_map();
    let v = classify_mean_ergodic(&map, DEFAULT_TOL, &grid, DEFAULT_J_MAX).map_err(|e| e.to_string())?;
    ensure(v.verdict == Verdict::NotMeanErgodic, || format!("verdict {}", v.verdict))?;
    ensure(v.violated_condition.is_some(), || "no violated condition recorded".into())?;
    let eps = 0.9;
    let rows = 20;
    let array = build_triangular_array(&map, eps, rows, &grid).map_err(|e| e.to_string())?;
    for (j, a) in array.anchors.iter().enumerate() {
        let expected = eps.powf(0.5f64.powi(j as i32 + 1));
        ensure(distance(a.coords(), &[c(expected, 0.0), c(0.0, 0.0)]) <= 1e-12, || {
            format!("anchor {} = {:?}, expected {expected}", j + 1, a.coords())
        })?;
    }
    let f = witness_function(&array).map_err(|e| e.to_string())?;
    let report = f.report(&array, &grid).map_err(|e| e.to_string())?;
    ensure(report.origin_value == 0.0, || format!("f(0) = {}", report.origin_value))?;
    ensure(report.node_error <= 1e-8, || format!("node error {:e}", report.node_error))?;
    let floor = 0.8 * eps * eps / report.sup_grid;
    let lowest = report.gap_lower_bounds.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(report.gap_lower_bounds.len() == rows && lowest >= floor, || {
        format!("gap lower bound {lowest} < {floor}")
    })?;
    Ok(format!(
        "NotMeanErgodic, {} distinct nodes, node error {:.1e}, sup|f| {:.3}, min gap {lowest:.4} >= {floor:.4}",
        array.nodes.len(),
        report.node_error,
        report.sup_grid
    ))
}

fn no_fixed_point() -> Outcome {
    let start = Instant::now();
    let map = HoloMap::mobius(CMatrix::identity(2).scale(c(-1.0, 0.0)), Point::real(&[-0.5, 0.0])).unwrap();
    let v = classify_mean_ergodic(&map, DEFAULT_TOL, &GridSpec::default(), DEFAULT_J_MAX).map_err(|e| e.to_string())?;
    ensure(v.verdict == Verdict::NotUniformlyMeanErgodicMeanUnknown, || format!("verdict {}", v.verdict))?;
    let dw = v.denjoy_wolff.as_ref().ok_or("no Denjoy-Wolff estimate")?;
    let err = distance(dw.point.coords(), &[c(1.0, 0.0), c(0.0, 0.0)]);
    ensure(err <= 1e-6, || format!("Denjoy-Wolff point off by {err:e}"))?;
    ensure(v.witness.len() == 10, || format!("{} witnesses", v.witness.len()))?;
    // ‖g_j‖_∞ = 1: |g| <= 1 on the ball with equality at the boundary point.
    let min_gap = v.witness.iter().map(|w| w.gap).fold(f64::INFINITY, f64::min);
    ensure(min_gap >= 0.5, || format!("witness gap {min_gap}"))?;
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "Denjoy-Wolff error {err:.1e}, min witness gap {min_gap:.6}, k_10 = {}, {:.2?}",
        v.witness[9].k,
        start.elapsed()
    ))
}

fn kobayashi_bound() -> Outcome {
    let map = quarter_turn();
    let HoloMap::Linear(a) = &map else { unreachable!() };
    let rho = estimate_retraction(&map, 4, DEFAULT_J_MAX, &GridSpec::default(), 1e-8).map_err(|e| e.to_string())?;
    let mut slack = f64::INFINITY;
    for j in 1..=16 {
        let bound = contracting_block_bound(a, 4, j as u64).map_err(|e| e.to_string())?;
        let measured = rho.bergman_sup_trace[j - 1];
        ensure(measured <= bound + 1e-6, || format!("j = {j}: {measured} > {bound}"))?;
        slack = slack.min(bound - measured);
    }
    Ok(format!("sup beta(phi_4j, rho) <= omega(|B^4j|) + 1e-6 for j <= 16 (min slack {slack:.2e})"))
}

fn dilation() -> Outcome {
    let grid = GridSpec::default();
    let mut found = Vec::new();
    for map in [
        HoloMap::linear(CMatrix::identity(2).scale(c(0.5, 0.0))).unwrap(),
        square_map(),
    ] {
        let rho = estimate_retraction(&map, 1, DEFAULT_J_MAX, &grid, 1e-8).map_err(|e| e.to_string())?;
        let d = boundary_dilation_ratio(&map, &rho, DEFAULT_ETA, &grid).map_err(|e| e.to_string())?;
        ensure(d.min_ratio >= 1.5 - 1e-6, || format!("min ratio {}", d.min_ratio))?;
        found.push(d.min_ratio);
    }
    Ok(format!("min ratios {:.9} and {:.9}", found[0], found[1]))
}

fn interpolation_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let grid = GridSpec::geometric(24, 8, 5);
    let mut report = Vec::new();
    for a in [0.3f64, 0.4, 0.5] {
        let pts: Vec<Point> = (1..=20)
            .map(|j| {
                let r = 1.0 - 0.5 * (0.99 * a).powi(j);
                let d = ball_point(2, 1.0, &mut rng);
                let len = norm(&d);
                Point::new(d.iter().map(|x| x * (r / len)).collect()).unwrap()
            })
            .collect();
        let seq = NodeSequence::new(pts, "generated").map_err(|e| e.to_string())?;
        ensure(ratio_condition(&seq, a).holds, || format!("ratio fails for a = {a}"))?;
        let deltas: Vec<f64> = (2..=20)
            .map(|t| separation_products(&seq, t).map(|s| s.delta_min))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(deltas.iter().all(|&d| d > 0.0), || "zero separation".into())?;
        ensure(deltas.windows(2).all(|w| w[1] <= w[0]), || "delta_min increased with truncation".into())?;
        let (d15, d20) = (deltas[13], deltas[18]);
        ensure((d15 - d20) <= 1e-3 * d20, || format!("delta_min not stable: {d15} vs {d20}"))?;

        let f = build_interpolants(&seq).map_err(|e| e.to_string())?;
        let kron = f.kronecker_error().map_err(|e| e.to_string())?;
        ensure(kron <= 1e-10, || format!("Kronecker error {kron:e}"))?;
        let (sups, _) = f.grid_sups(&grid).map_err(|e| e.to_string())?;
        let excess = sups.iter().map(|s| s - 1.0 / f.delta_min).fold(f64::NEG_INFINITY, f64::max);
        ensure(excess <= 1e-6, || format!("sup exceeds 1/delta by {excess}"))?;
        report.push(format!("a={a}: delta {d20:.3e}, kron {kron:.0e}"));
    }
    Ok(report.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("involution identities, Bergman invariance and contraction", geometry_suite),
        ("Bergman-Lipschitz ratio stabilizes", lipschitz_estimate),
        ("matrix symbols match the spectral rule", linear_oracle),
        ("quarter turn: 4-fold average, retraction onto the first axis", periodic_average),
        ("diag(0.5, 0.3): contraction branch and certificate", contraction_branch),
        ("z1^2: failure branch, triangular array and witness", failure_branch),
        ("hyperbolic slice: no fixed point, Denjoy-Wolff and g^k witnesses", no_fixed_point),
        ("quarter turn: Bergman sup below the contracting-block bound", kobayashi_bound),
        ("boundary dilation ratio 1.5", dilation),
        ("ratio condition, separation and interpolants", interpolation_chain),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
