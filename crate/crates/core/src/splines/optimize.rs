use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::geom::Point;

use super::bspline::BSplineCurve;
use super::fit::PathSamples;

const DAMPING: f64 = 1e-6;
const MAX_HALVINGS: usize = 12;

#[derive(Debug, Clone)]
pub struct ControlOptimization {
    pub curve: BSplineCurve,
    /// Objective of the starting curve followed by each accepted step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The optimizer hit non-finite values and returned the starting curve.
    pub degraded: bool,
}

/// `Σ (d_j - ||p_j - γ(u_j)||)²` by direct summation.
pub fn spline_objective(curve: &BSplineCurve, samples: &PathSamples) -> f64 {
    samples
        .points
        .iter()
        .zip(&samples.distances)
        .zip(&samples.params)
        .map(|((p, d), &u)| match curve.evaluate(u) {
            Ok(q) => (d - (p - q).norm()).powi(2),
            Err(_) => f64::NAN,
        })
        .sum()
}

/// Indices of control points the optimizer may move: all unique points of a
/// closed curve, the interior ones of an open curve.
fn free_range(curve: &BSplineCurve) -> std::ops::Range<usize> {
    let k = curve.unique_control_count();
    if curve.is_closed() {
        0..k
    } else {
        1..k - 1
    }
}

/// One majorization step: each point pulls its curve sample toward
/// `p - d * (p - γ) / |p - γ|`, and the linear least-squares problem over the
/// free control points is solved with light damping.
fn surrogate_step(curve: &BSplineCurve, samples: &PathSamples) -> Option<Vec<Point>> {
    let free = free_range(curve);
    let nfree = free.len();
    let current: Vec<Point> = curve.control_points()[..curve.unique_control_count()].to_vec();
    if nfree == 0 {
        return Some(current);
    }
    let mut ata = DMatrix::<f64>::zeros(nfree, nfree);
    let mut atb = DMatrix::<f64>::zeros(nfree, 3);
    for ((p, &d), &u) in samples.points.iter().zip(&samples.distances).zip(&samples.params) {
        let q = curve.evaluate(u).ok()?;
        let v = p - q;
        let norm = v.norm();
        let target = if norm > 1e-15 { p - v * (d / norm) } else { q };
        let row = curve.basis_row(u).ok()?;
        let mut rhs = target.coords;
        let mut cols: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (i, w) in row {
            if free.contains(&i) {
                cols.push((i - free.start, w));
            } else {
                rhs -= current[i].coords * w;
            }
        }
        for &(a, wa) in &cols {
            for &(b, wb) in &cols {
                ata[(a, b)] += wa * wb;
            }
            for c in 0..3 {
                atb[(a, c)] += wa * rhs[c];
            }
        }
    }
    let scale = (0..nfree).map(|i| ata[(i, i)]).sum::<f64>() / nfree as f64;
    let lambda = DAMPING * scale.max(1e-12);
    for i in 0..nfree {
        ata[(i, i)] += lambda;
        for c in 0..3 {
            atb[(i, c)] += lambda * current[free.start + i].coords[c];
        }
    }
    let chol = ata.cholesky()?;
    let mut next = current.clone();
    for c in 0..3 {
        let x: DVector<f64> = chol.solve(&atb.column(c).into_owned());
        for i in 0..nfree {
            next[free.start + i].coords[c] = x[i];
        }
    }
    next.iter().all(|p| p.coords.iter().all(|c| c.is_finite())).then_some(next)
}

/// Shapes the curve so that distances from the samples to their fixed curve
/// parameters match the field values.
///
/// Open curves keep their end control points (and so their endpoints) fixed;
/// closed curves stay periodic by construction. Steps that would raise the
/// objective are halved until they do not. Non-finite values revert to the
/// input curve with `degraded` set.
pub fn optimize_control_points(
    curve: &BSplineCurve,
    samples: &PathSamples,
    iters: usize,
    step_tol: f64,
) -> ControlOptimization {
    let start = spline_objective(curve, samples);
    let reverted = |history: Vec<f64>, iterations| ControlOptimization {
        curve: curve.clone(),
        objective_history: history,
        iterations,
        converged: false,
        degraded: true,
    };
    if !start.is_finite() {
        warn!("spline objective is not finite before optimization");
        return reverted(vec![start], 0);
    }
    let mut history = vec![start];
    let mut best = curve.clone();
    let mut best_obj = start;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..iters {
        iterations += 1;
        let current: Vec<Point> = best.control_points()[..best.unique_control_count()].to_vec();
        let proposal = match surrogate_step(&best, samples) {
            Some(p) => p,
            None => {
                warn!("control point step produced non-finite values");
                return reverted(vec![start], iterations);
            }
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Point> =
                current.iter().zip(&proposal).map(|(c, p)| c + (p - c) * alpha).collect();
            let Ok(candidate) = best.with_unique_control_points(&trial) else { break };
            let obj = spline_objective(&candidate, samples);
            if !obj.is_finite() {
                warn!("spline objective became non-finite");
                return reverted(vec![start], iterations);
            }
            if obj <= best_obj {
                let moved = current.iter().zip(&trial).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                accepted = Some((candidate, obj, moved));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((candidate, obj, moved)) => {
                best = candidate;
                best_obj = obj;
                history.push(obj);
                if moved < step_tol {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    ControlOptimization { curve: best, objective_history: history, iterations, converged, degraded: false }
}
