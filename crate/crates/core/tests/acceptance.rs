//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) and exits non-zero when a
//! blocking criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirefit_core::metrics::{chamfer_distance, evaluate, hausdorff_distance};
use wirefit_core::segmentation::CurveCluster;
use wirefit_core::synthgen::{exact_distance, make_shape, sample_field, PRESETS};
use wirefit_core::topograph::{graph_objective, init_open_polyline, subdivide_polyline};
use wirefit_core::wireframe::ENDPOINT_TOLERANCE;
use wirefit_core::{extract_wireframe, BSplineCurve, PipelineConfig, PipelineOutput, Point, Vec3};

const R: f64 = 0.02;
const SEED: u64 = 1;
const SUITE_MIN_PRESETS: usize = 10;
const SUITE_MIN_SUCCESS: f64 = 0.8;
const SUITE_MAX_CD: f64 = 4.0 * R;
const SUITE_MAX_HD: f64 = 0.1;
const SUITE_BUDGET_SECS: f64 = 60.0;
const METRIC_TOL: f64 = 1e-12;
const SEAM_TOL: f64 = 1e-9;
const ORACLE_PAIRS: usize = 100_000;
const ORACLE_ON_CURVE: usize = 10_000;
const ORACLE_ON_CURVE_TOL: f64 = 1e-9;
const NOISE_SIGMA: f64 = 0.25 * R;
const NOISE_MAX_CD: f64 = 6.0 * R;

struct Outcome {
    name: &'static str,
    passed: bool,
    blocking: bool,
    detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome { name, passed, blocking: true, detail }
}

struct SuiteRun {
    name: &'static str,
    result: Result<PipelineOutput, String>,
    chamfer: Option<f64>,
    hausdorff: Option<f64>,
}

fn run_suite() -> (Vec<SuiteRun>, f64) {
    let start = Instant::now();
    let config = PipelineConfig::default();
    let runs = PRESETS
        .iter()
        .map(|&name| {
            let shape = make_shape(name, 1.0).expect("preset builds");
            let cloud = sample_field(&shape, R, 0.0, SEED).expect("preset samples");
            match extract_wireframe(&cloud, &config) {
                Ok(out) => {
                    let report = evaluate(&out.wireframe, &shape.truth_wireframe(), R / 2.0).expect("evaluation");
                    SuiteRun { name, chamfer: report.chamfer, hausdorff: report.hausdorff, result: Ok(out) }
                }
                Err(e) => SuiteRun { name, result: Err(e.to_string()), chamfer: None, hausdorff: None },
            }
        })
        .collect();
    (runs, start.elapsed().as_secs_f64())
}

fn check_suite(runs: &[SuiteRun], secs: f64) -> Outcome {
    let ok: Vec<&SuiteRun> = runs.iter().filter(|r| r.chamfer.is_some()).collect();
    let rate = ok.len() as f64 / runs.len() as f64;
    let mean = |f: fn(&SuiteRun) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len().max(1) as f64;
    let cd = mean(|r| r.chamfer.unwrap());
    let hd = mean(|r| r.hausdorff.unwrap());
    for r in runs {
        match (&r.result, r.chamfer, r.hausdorff) {
            (Ok(_), Some(c), Some(h)) => println!("    {:28} CD {c:.4}  HD {h:.4}", r.name),
            (Err(e), _, _) => println!("    {:28} failed: {e}", r.name),
            _ => println!("    {:28} empty wireframe", r.name),
        }
    }
    let passed = runs.len() >= SUITE_MIN_PRESETS
        && rate >= SUITE_MIN_SUCCESS
        && !ok.is_empty()
        && cd <= SUITE_MAX_CD
        && hd <= SUITE_MAX_HD;
    if secs > SUITE_BUDGET_SECS {
        println!("    note: suite took {secs:.1} s, over the {SUITE_BUDGET_SECS} s budget");
    }
    outcome(
        "synthetic suite",
        passed,
        format!(
            "{} presets, success {:.0}% (>= {:.0}%), mean CD {cd:.4} (<= {SUITE_MAX_CD}), mean HD {hd:.4} (<= {SUITE_MAX_HD}), {secs:.1} s",
            runs.len(),
            100.0 * rate,
            100.0 * SUITE_MIN_SUCCESS
        ),
    )
}

fn check_topology(runs: &[SuiteRun]) -> Outcome {
    let find = |name: &str| runs.iter().find(|r| r.name == name).and_then(|r| r.result.as_ref().ok());
    let mut problems = Vec::new();
    match find("cube") {
        Some(out) => {
            let c = &out.manifest.counts;
            if c.corner_clusters != 8 || c.curve_clusters != 12 {
                problems.push(format!("cube: {} corner / {} curve clusters", c.corner_clusters, c.curve_clusters));
            }
        }
        None => problems.push("cube failed".into()),
    }
    match find("closed-ring") {
        Some(out) => {
            let w = &out.wireframe;
            if !(w.corners.is_empty() && w.curves.len() == 1 && w.curves[0].is_closed()) {
                problems.push(format!("closed-ring: {} corners, {} curves", w.corners.len(), w.curves.len()));
            }
        }
        None => problems.push("closed-ring failed".into()),
    }
    let passed = problems.is_empty();
    let detail = if passed { "cube 8/12 clusters, closed-ring 0 corners + 1 closed curve".into() } else { problems.join("; ") };
    outcome("topology recovery", passed, detail)
}

fn brute_directed(x: &[Point], y: &[Point]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut worst: f64 = 0.0;
    for p in x {
        let d = y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
        sum += d;
        worst = worst.max(d);
    }
    (sum / x.len() as f64, worst)
}

fn check_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_err: f64 = 0.0;
    let mut order_ok = true;
    let mut identity_ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=500);
        let m = rng.random_range(1..=500);
        let mut cloud = |k: usize| -> Vec<Point> {
            (0..k).map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>())).collect()
        };
        let x = cloud(n);
        let y = cloud(m);
        let (ax, wx) = brute_directed(&x, &y);
        let (ay, wy) = brute_directed(&y, &x);
        let cd = chamfer_distance(&x, &y).unwrap();
        let hd = hausdorff_distance(&x, &y).unwrap();
        worst_err = worst_err.max((cd - 0.5 * (ax + ay)).abs()).max((hd - wx.max(wy)).abs());
        order_ok &= cd <= hd;
        identity_ok &= chamfer_distance(&x, &x).unwrap() == 0.0 && hausdorff_distance(&x, &x).unwrap() == 0.0;
    }
    outcome(
        "metric correctness",
        worst_err <= METRIC_TOL && order_ok && identity_ok,
        format!("max |fast - brute| {worst_err:.1e} (<= {METRIC_TOL:.0e}), CD <= HD: {order_ok}, identical sets zero: {identity_ok}"),
    )
}

fn non_increasing(h: &[f64]) -> bool {
    h.windows(2).all(|w| w[1] <= w[0])
}

fn check_monotonicity(runs: &[SuiteRun]) -> Outcome {
    let mut problems = Vec::new();
    let mut node_runs = 0;
    let mut spline_runs = 0;
    for run in runs {
        let Ok(out) = &run.result else { continue };
        let nodes = &out.diagnostics.node_objective_history;
        node_runs += 1;
        if !non_increasing(nodes) {
            problems.push(format!("{}: node objective rose", run.name));
        }
        if let Some(&last) = nodes.last() {
            let direct = graph_objective(&out.graph, &out.skeleton);
            if (direct - last).abs() > 1e-9 * last.abs().max(1e-12) {
                problems.push(format!("{}: node objective {last} vs direct sum {direct}", run.name));
            }
        }
        for (k, h) in out.diagnostics.spline_objective_histories.iter().enumerate() {
            spline_runs += 1;
            if !non_increasing(h) {
                problems.push(format!("{}: spline {k} objective rose", run.name));
            }
        }
    }
    let passed = problems.is_empty() && node_runs > 0;
    let detail = if passed {
        format!("{node_runs} node histories, {spline_runs} spline histories non-increasing")
    } else {
        problems.join("; ")
    };
    outcome("optimization monotonicity", passed, detail)
}

fn check_subdivision() -> Outcome {
    let n = 100;
    let positions: Vec<Point> = (0..n)
        .map(|i| {
            let a = FRAC_PI_2 * i as f64 / (n - 1) as f64;
            Point::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    let cluster = CurveCluster { id: 0, member_indices: (0..n).collect(), positions, distances: vec![0.0; n] };
    let chord = init_open_polyline(&cluster, 0, n - 1);
    let (a, b) = (chord.nodes[0], chord.nodes[1]);
    let oracle = (0..n)
        .max_by(|&i, &j| {
            let di = wirefit_core::geom::segment_distance(&cluster.positions[i], &a, &b);
            let dj = wirefit_core::geom::segment_distance(&cluster.positions[j], &a, &b);
            di.total_cmp(&dj)
        })
        .unwrap();
    let midpoint = (n - 1) as f64 / 2.0;
    let one = subdivide_polyline(&chord, &cluster, 0.2 * R, 1).unwrap();
    let inserted = one.polyline.nodes.get(1).copied();
    let idx = inserted.and_then(|p| cluster.positions.iter().position(|q| *q == p));
    let full = subdivide_polyline(&chord, &cluster, 1e-4, 24).unwrap();
    let near = |i: usize| (i as f64 - midpoint).abs() <= 2.0;
    let passed = near(oracle) && idx.is_some_and(|i| near(i) && i.abs_diff(oracle) <= 2) && non_increasing(&full.max_residuals);
    outcome(
        "subdivision correctness",
        passed,
        format!(
            "oracle argmax {oracle}, inserted {:?}, arc midpoint {midpoint}, {} rounds non-increasing: {}",
            idx,
            full.max_residuals.len(),
            non_increasing(&full.max_residuals)
        ),
    )
}

/// Cox-de Boor evaluation straight from the knot vector. With `left` set the
/// spans are taken as half-open on the left, giving the limit from below.
fn de_boor(knots: &[f64], ctrl: &[Point], degree: usize, u: f64, left: bool) -> (Point, Vec3) {
    let basis = |i: usize, p: usize| -> f64 {
        fn rec(t: &[f64], i: usize, p: usize, u: f64, left: bool) -> f64 {
            if p == 0 {
                let inside = if left { t[i] < u && u <= t[i + 1] } else { t[i] <= u && u < t[i + 1] };
                return if inside { 1.0 } else { 0.0 };
            }
            let mut v = 0.0;
            let da = t[i + p] - t[i];
            if da > 0.0 {
                v += (u - t[i]) / da * rec(t, i, p - 1, u, left);
            }
            let db = t[i + p + 1] - t[i + 1];
            if db > 0.0 {
                v += (t[i + p + 1] - u) / db * rec(t, i + 1, p - 1, u, left);
            }
            v
        }
        rec(knots, i, p, u, left)
    };
    let mut pos = Vec3::zeros();
    for (i, c) in ctrl.iter().enumerate() {
        pos += c.coords * basis(i, degree);
    }
    let mut tan = Vec3::zeros();
    if degree > 0 {
        for i in 0..ctrl.len() - 1 {
            let dt = knots[i + degree + 1] - knots[i + 1];
            if dt > 0.0 {
                tan += (ctrl[i + 1] - ctrl[i]) * (degree as f64 / dt) * basis(i + 1, degree - 1);
            }
        }
    }
    (Point::from(pos), tan)
}

fn seam_mismatch(curve: &BSplineCurve) -> (f64, f64) {
    let (start, end) = curve.domain();
    let (p0, t0) = de_boor(curve.knots(), curve.control_points(), curve.degree(), start, false);
    let (p1, t1) = de_boor(curve.knots(), curve.control_points(), curve.degree(), end, true);
    ((p1 - p0).norm(), (t1 - t0).norm())
}

fn check_spline_constraints(runs: &[SuiteRun]) -> Outcome {
    let mut worst_seam: f64 = 0.0;
    let mut open_curves = 0;
    let mut closed_curves = 0;
    let mut problems = Vec::new();
    for run in runs {
        let Ok(out) = &run.result else { continue };
        let w = &out.wireframe;
        let loose = w.unanchored_curves(ENDPOINT_TOLERANCE);
        if !loose.is_empty() {
            problems.push(format!("{}: curves {loose:?} miss their corners", run.name));
        }
        for c in &w.curves {
            if c.is_closed() {
                closed_curves += 1;
                let (dp, dt) = seam_mismatch(c);
                worst_seam = worst_seam.max(dp).max(dt);
            } else {
                open_curves += 1;
            }
        }
    }
    if worst_seam > SEAM_TOL {
        problems.push(format!("seam mismatch {worst_seam:.1e}"));
    }
    let passed = problems.is_empty();
    let detail = if passed {
        format!("{open_curves} open curves anchored within {ENDPOINT_TOLERANCE:.0e}, {closed_curves} closed seams within {worst_seam:.1e} (<= {SEAM_TOL:.0e})")
    } else {
        problems.join("; ")
    };
    outcome("spline constraints", passed, detail)
}

fn check_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_lip: f64 = f64::NEG_INFINITY;
    let mut worst_on: f64 = 0.0;
    for &name in PRESETS {
        let shape = make_shape(name, 1.0).unwrap();
        for k in 0..ORACLE_PAIRS {
            let a = Point::new(
                rng.random_range(-0.1..1.1),
                rng.random_range(-0.1..1.1),
                rng.random_range(-0.1..1.1),
            );
            // half the pairs are close, where clipping and kinks matter
            let reach = if k % 2 == 0 { 0.05 } else { 1.0 };
            let b = a + Vec3::new(
                rng.random_range(-reach..reach),
                rng.random_range(-reach..reach),
                rng.random_range(-reach..reach),
            );
            let gap = (exact_distance(&a, &shape) - exact_distance(&b, &shape)).abs() - (a - b).norm();
            worst_lip = worst_lip.max(gap);
        }
        for k in 0..ORACLE_ON_CURVE {
            let curve = &shape.curves[k % shape.curves.len()];
            let p = curve.point_at(rng.random::<f64>());
            worst_on = worst_on.max(exact_distance(&p, &shape));
        }
    }
    outcome(
        "oracle integrity",
        worst_lip <= 1e-12 && worst_on <= ORACLE_ON_CURVE_TOL,
        format!(
            "{} presets: max |d(a)-d(b)| - |a-b| = {worst_lip:.1e} over {ORACLE_PAIRS} pairs each, max on-curve distance {worst_on:.1e} (<= {ORACLE_ON_CURVE_TOL:.0e})",
            PRESETS.len()
        ),
    )
}

fn check_noise() -> Outcome {
    let shape = make_shape("cube", 1.0).unwrap();
    let cloud = sample_field(&shape, R, NOISE_SIGMA, SEED).unwrap();
    let result = extract_wireframe(&cloud, &PipelineConfig::default())
        .map_err(|e| e.to_string())
        .and_then(|out| evaluate(&out.wireframe, &shape.truth_wireframe(), R / 2.0).map_err(|e| e.to_string()));
    let (passed, detail) = match result {
        Ok(rep) => match rep.chamfer {
            Some(cd) => (cd <= NOISE_MAX_CD, format!("cube, sigma {NOISE_SIGMA}: CD {cd:.4} (<= {NOISE_MAX_CD})")),
            None => (false, "cube with noise gave an empty wireframe".into()),
        },
        Err(e) => (false, format!("cube with noise failed: {e}")),
    };
    Outcome { name: "noise robustness", passed, blocking: false, detail }
}

fn main() {
    let (runs, secs) = run_suite();
    let outcomes = vec![
        check_suite(&runs, secs),
        check_topology(&runs),
        check_metrics(),
        check_monotonicity(&runs),
        check_subdivision(),
        check_spline_constraints(&runs),
        check_oracle(),
        check_noise(),
    ];
    let mut blocking_failures = 0;
    for o in &outcomes {
        let tag = match (o.passed, o.blocking) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (non-blocking)",
        };
        println!("{tag:5} {:28} {}", o.name, o.detail);
        if !o.passed && o.blocking {
            blocking_failures += 1;
        }
    }
    if blocking_failures > 0 {
        println!("{blocking_failures} blocking criteria failed");
        std::process::exit(1);
    }
}
