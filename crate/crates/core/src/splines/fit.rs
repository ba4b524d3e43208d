use log::debug;
use nalgebra::DMatrix;

use crate::cloud::SharpSkeleton;
use crate::error::{Error, Result};
use crate::geom::Point;

use super::bspline::{clamped_knots, BSplineCurve};
use super::paths::CurvePath;

/// Singular values below this fraction of the largest count as rank loss.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SplineFit {
    pub curve: BSplineCurve,
    /// Fell back to a straight segment because no spline fit was well posed.
    pub degraded: bool,
    pub rms: f64,
}

/// Data points of a path, sorted by parameter.
#[derive(Debug, Clone)]
pub struct PathSamples {
    pub points: Vec<Point>,
    pub distances: Vec<f64>,
    pub params: Vec<f64>,
}

impl PathSamples {
    pub fn from_path(path: &CurvePath, skeleton: &SharpSkeleton) -> Self {
        PathSamples {
            points: path.assigned_points.iter().map(|&i| skeleton.positions[i]).collect(),
            distances: path.assigned_points.iter().map(|&i| skeleton.distances[i]).collect(),
            params: path.params_u.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Keeps candidate knots (inside `(start, end)`, sorted) so that every span
/// holds at least `min_count` parameters. `cyclic` treats the last span as
/// wrapping to the first.
pub fn thin_knots(candidates: &[f64], params: &[f64], start: f64, end: f64, min_count: usize) -> Vec<f64> {
    let count = |lo: f64, hi: f64| params.iter().filter(|&&u| u > lo && u < hi).count();
    let mut kept: Vec<f64> = Vec::new();
    let mut last = start;
    for &k in candidates {
        if k <= start || k >= end {
            continue;
        }
        if count(last, k) >= min_count {
            kept.push(k);
            last = k;
        }
    }
    while let Some(&k) = kept.last() {
        if count(k, end) >= min_count {
            break;
        }
        kept.pop();
    }
    kept
}

fn solve_least_squares(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if a.ncols() == 0 {
        return Some(DMatrix::zeros(0, b.ncols()));
    }
    if a.nrows() < a.ncols() {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= RANK_TOLERANCE * smax {
        return None;
    }
    svd.solve(b, 0.0).ok()
}

fn rms(curve: &BSplineCurve, samples: &PathSamples) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let ss: f64 = samples
        .points
        .iter()
        .zip(&samples.params)
        .map(|(p, &u)| curve.evaluate(u).map(|q| (p - q).norm_squared()).unwrap_or(f64::INFINITY))
        .sum();
    (ss / samples.len() as f64).sqrt()
}

/// Least-squares open curve of the given degree and interior knots, with the
/// ends pinned to `first` and `last`.
pub fn fit_open_with_knots(
    samples: &PathSamples,
    degree: usize,
    interior: &[f64],
    domain: (f64, f64),
    first: Point,
    last: Point,
) -> Option<BSplineCurve> {
    let knots = clamped_knots(degree, domain.0, domain.1, interior);
    let n = knots.len() - degree - 1;
    let template = BSplineCurve::new_open(degree, knots.clone(), vec![first; n]).ok()?;
    let free = n - 2;
    let mut a = DMatrix::zeros(samples.len(), free);
    let mut b = DMatrix::zeros(samples.len(), 3);
    for (r, (p, &u)) in samples.points.iter().zip(&samples.params).enumerate() {
        let mut rhs = p.coords;
        for (i, w) in template.basis_row(u).ok()? {
            if i == 0 {
                rhs -= first.coords * w;
            } else if i == n - 1 {
                rhs -= last.coords * w;
            } else {
                a[(r, i - 1)] += w;
            }
        }
        for c in 0..3 {
            b[(r, c)] = rhs[c];
        }
    }
    let x = solve_least_squares(&a, &b)?;
    let mut ctrl = Vec::with_capacity(n);
    ctrl.push(first);
    for i in 0..free {
        ctrl.push(Point::new(x[(i, 0)], x[(i, 1)], x[(i, 2)]));
    }
    ctrl.push(last);
    BSplineCurve::new_open(degree, knots, ctrl).ok()
}

/// Least-squares periodic curve over `[0, period)` with the given base knots.
pub fn fit_closed_with_knots(samples: &PathSamples, degree: usize, base: &[f64], period: f64) -> Option<BSplineCurve> {
    let k = base.len();
    let template = BSplineCurve::periodic(degree, base, period, vec![Point::origin(); k]).ok()?;
    let mut a = DMatrix::zeros(samples.len(), k);
    let mut b = DMatrix::zeros(samples.len(), 3);
    for (r, (p, &u)) in samples.points.iter().zip(&samples.params).enumerate() {
        for (i, w) in template.basis_row(u).ok()? {
            a[(r, i)] += w;
        }
        for c in 0..3 {
            b[(r, c)] = p.coords[c];
        }
    }
    let x = solve_least_squares(&a, &b)?;
    let ctrl = (0..k).map(|i| Point::new(x[(i, 0)], x[(i, 1)], x[(i, 2)])).collect();
    BSplineCurve::periodic(degree, base, period, ctrl).ok()
}

fn straight_segment(first: Point, last: Point, length: f64) -> Result<BSplineCurve> {
    BSplineCurve::new_open(1, clamped_knots(1, 0.0, length, &[]), vec![first, last])
}

/// Fits a B-spline to the points assigned to `path`.
///
/// Open paths are pinned to their end nodes; closed paths use a periodic
/// curve. Interior knots come from the path's node parameters, thinned until
/// every span holds enough data. When the fit is ill-posed the degree is
/// lowered; an open path with no workable degree becomes a straight segment
/// flagged as degraded.
pub fn fit_spline(path: &CurvePath, nodes: &[Point], skeleton: &SharpSkeleton, degree: usize) -> Result<SplineFit> {
    if degree == 0 {
        return Err(Error::Argument("spline degree must be at least 1".into()));
    }
    let length = path.length();
    if !(length > 0.0) {
        return Err(Error::Argument("path has zero length".into()));
    }
    let samples = PathSamples::from_path(path, skeleton);
    let candidates = &path.knots_t[1..path.knots_t.len() - 1];

    if path.closed {
        let mut p = degree.min(samples.len().saturating_sub(1));
        while p >= 1 {
            let min_unique = (p + 1).max(3);
            let mut base = vec![0.0];
            base.extend(thin_knots(candidates, &samples.params, 0.0, length, p));
            if base.len() < min_unique {
                base = (0..min_unique).map(|i| length * i as f64 / min_unique as f64).collect();
            }
            if let Some(curve) = fit_closed_with_knots(&samples, p, &base, length) {
                let rms = rms(&curve, &samples);
                return Ok(SplineFit { curve, degraded: p < degree, rms });
            }
            debug!("closed fit of degree {p} ill-posed, lowering degree");
            p -= 1;
        }
        return Err(Error::Internal("closed path has too few points for any periodic fit".into()));
    }

    let first = nodes[path.first_node()];
    let last = nodes[path.last_node()];
    let mut p = degree.min(samples.len().saturating_sub(1));
    while p >= 2 {
        let interior = thin_knots(candidates, &samples.params, 0.0, length, p);
        if let Some(curve) = fit_open_with_knots(&samples, p, &interior, (0.0, length), first, last) {
            let rms = rms(&curve, &samples);
            return Ok(SplineFit { curve, degraded: false, rms });
        }
        debug!("open fit of degree {p} ill-posed, lowering degree");
        p -= 1;
    }
    let curve = straight_segment(first, last, length)?;
    let rms = rms(&curve, &samples);
    Ok(SplineFit { curve, degraded: degree > 1 && samples.len() > degree, rms })
}
