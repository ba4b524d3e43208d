use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::spatial::KdTree;
use crate::splines::BSplineCurve;
use crate::wireframe::Wireframe;

/// Fewest samples emitted for any curve.
pub const MIN_CURVE_SAMPLES: usize = 3;
const MIN_TABLE_STEPS_PER_SPAN: usize = 32;
const MAX_TABLE_STEPS: usize = 1 << 16;

/// Samples a curve at equal arc-length steps close to `spacing`. Open curves
/// include both endpoints; closed curves list the seam point once.
pub fn sample_curve(curve: &BSplineCurve, spacing: f64) -> Result<Vec<Point>> {
    if !(spacing > 0.0) {
        return Err(Error::Argument(format!("sample spacing must be positive, got {spacing}")));
    }
    let (start, end) = curve.domain();
    let knots = curve.knots();
    let p = curve.degree();
    let breaks: Vec<f64> = {
        let mut b: Vec<f64> =
            knots[p..=curve.control_points().len()].iter().copied().filter(|&k| k >= start && k <= end).collect();
        b.dedup();
        b
    };
    let polygon: f64 = curve.control_points().windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let spans = breaks.len().saturating_sub(1).max(1);
    let per_span = ((8.0 * polygon / spacing / spans as f64).ceil() as usize)
        .max(MIN_TABLE_STEPS_PER_SPAN)
        .min(MAX_TABLE_STEPS / spans + 1);

    let mut us = Vec::with_capacity(spans * per_span + 1);
    for w in breaks.windows(2) {
        for k in 0..per_span {
            us.push(w[0] + (w[1] - w[0]) * k as f64 / per_span as f64);
        }
    }
    us.push(end);
    let pts: Vec<Point> = us.iter().map(|&u| curve.evaluate(u)).collect::<Result<_>>()?;
    let mut arc = Vec::with_capacity(pts.len());
    arc.push(0.0);
    for w in pts.windows(2) {
        arc.push(arc.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *arc.last().unwrap();

    let n = if curve.is_closed() {
        ((total / spacing).round() as usize).max(MIN_CURVE_SAMPLES)
    } else {
        ((total / spacing).round() as usize + 1).max(MIN_CURVE_SAMPLES)
    };
    let denom = if curve.is_closed() { n } else { n - 1 } as f64;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let s = total * k as f64 / denom;
        if k == 0 {
            out.push(pts[0]);
            continue;
        }
        if !curve.is_closed() && k == n - 1 {
            out.push(*pts.last().unwrap());
            continue;
        }
        while j + 1 < arc.len() - 1 && arc[j + 1] < s {
            j += 1;
        }
        let seg = arc[j + 1] - arc[j];
        let f = if seg > 0.0 { ((s - arc[j]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        out.push(curve.evaluate(us[j] + f * (us[j + 1] - us[j]))?);
    }
    Ok(out)
}

pub fn sample_wireframe(wireframe: &Wireframe, spacing: f64) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for c in &wireframe.curves {
        out.extend(sample_curve(c, spacing)?);
    }
    Ok(out)
}

fn directed(from: &[Point], to: &KdTree) -> (f64, f64) {
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for p in from {
        let (_, d) = to.nearest(p).expect("non-empty tree");
        sum += d;
        max = max.max(d);
    }
    (sum / from.len() as f64, max)
}

fn both_directions(x: &[Point], y: &[Point]) -> Result<((f64, f64), (f64, f64))> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Argument("distance between point sets needs both sets non-empty".into()));
    }
    Ok((directed(x, &KdTree::new(y)), directed(y, &KdTree::new(x))))
}

/// Mean of the two directed mean nearest-neighbor distances.
pub fn chamfer_distance(x: &[Point], y: &[Point]) -> Result<f64> {
    let ((a, _), (b, _)) = both_directions(x, y)?;
    Ok(0.5 * (a + b))
}

/// Larger of the two directed worst-case nearest-neighbor distances.
pub fn hausdorff_distance(x: &[Point], y: &[Point]) -> Result<f64> {
    let ((_, a), (_, b)) = both_directions(x, y)?;
    Ok(a.max(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Unset when the prediction failed.
    pub chamfer: Option<f64>,
    pub hausdorff: Option<f64>,
    pub n_curves_predicted: usize,
    pub n_curves_truth: usize,
    pub failed: bool,
    pub degraded_curves: usize,
    pub sample_spacing: f64,
}

pub fn evaluate(predicted: &Wireframe, truth: &Wireframe, spacing: f64) -> Result<EvaluationReport> {
    if !(spacing > 0.0) {
        return Err(Error::Argument(format!("sample spacing must be positive, got {spacing}")));
    }
    if truth.is_empty() {
        return Err(Error::Argument("ground-truth wireframe has no curves".into()));
    }
    let mut report = EvaluationReport {
        chamfer: None,
        hausdorff: None,
        n_curves_predicted: predicted.curves.len(),
        n_curves_truth: truth.curves.len(),
        failed: predicted.is_empty(),
        degraded_curves: 0,
        sample_spacing: spacing,
    };
    if report.failed {
        return Ok(report);
    }
    let x = sample_wireframe(predicted, spacing)?;
    let y = sample_wireframe(truth, spacing)?;
    let ((cx, hx), (cy, hy)) = both_directions(&x, &y)?;
    report.chamfer = Some(0.5 * (cx + cy));
    report.hausdorff = Some(hx.max(hy));
    Ok(report)
}

/// Aggregate over many shapes: means over successful shapes and the share of failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub shapes: usize,
    pub failures: usize,
    pub mean_chamfer: Option<f64>,
    pub mean_hausdorff: Option<f64>,
    pub fail_percent: f64,
}

impl Summary {
    pub fn from_reports<'a, I>(method: &str, reports: I) -> Summary
    where
        I: IntoIterator<Item = &'a EvaluationReport>,
    {
        let (mut n, mut fails, mut cd, mut hd, mut ok) = (0, 0, 0.0, 0.0, 0);
        for r in reports {
            n += 1;
            match (r.failed, r.chamfer, r.hausdorff) {
                (false, Some(c), Some(h)) => {
                    cd += c;
                    hd += h;
                    ok += 1;
                }
                _ => fails += 1,
            }
        }
        let mean = |s: f64| (ok > 0).then(|| s / ok as f64);
        Summary {
            method: method.to_string(),
            shapes: n,
            failures: fails,
            mean_chamfer: mean(cd),
            mean_hausdorff: mean(hd),
            fail_percent: if n > 0 { 100.0 * fails as f64 / n as f64 } else { 0.0 },
        }
    }
}

/// Aligned text table with one row per summary.
pub fn format_table(rows: &[Summary]) -> String {
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    let width = rows.iter().map(|r| r.method.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    writeln!(out, "{:<width$}  {:>8}  {:>8}  {:>7}", "method", "CD", "HD", "fail %").unwrap();
    for r in rows {
        writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>7.1}",
            r.method,
            cell(r.mean_chamfer),
            cell(r.mean_hausdorff),
            r.fail_percent
        )
        .unwrap();
    }
    out
}
