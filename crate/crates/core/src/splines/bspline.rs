//! Non-rational B-spline curves in 3D.
//!
//! Open curves use clamped knot vectors. Closed curves use a periodic layout:
//! `K` unique control points followed by the first `degree` of them again,
//! and a knot vector whose differences repeat with the period, so the seam is
//! as smooth as any interior knot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Vec3};

const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct BSplineCurve {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Point>,
    closed: bool,
}

/// JSON shape of a curve inside a wireframe file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawCurve {
    pub closed: bool,
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 3]>,
}

impl TryFrom<RawCurve> for BSplineCurve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        let pts = raw.control_points.iter().map(|c| Point::new(c[0], c[1], c[2])).collect();
        if raw.closed {
            BSplineCurve::new_closed(raw.degree, raw.knots, pts)
        } else {
            BSplineCurve::new_open(raw.degree, raw.knots, pts)
        }
    }
}

impl From<BSplineCurve> for RawCurve {
    fn from(c: BSplineCurve) -> Self {
        RawCurve {
            closed: c.closed,
            degree: c.degree,
            knots: c.knots,
            control_points: c.control_points.iter().map(|p| [p.x, p.y, p.z]).collect(),
        }
    }
}

fn check_common(degree: usize, knots: &[f64], ctrl: &[Point]) -> Result<()> {
    if degree == 0 {
        return Err(Error::Validation("degree must be at least 1".into()));
    }
    if ctrl.len() < degree + 1 {
        return Err(Error::Validation(format!(
            "degree {degree} needs at least {} control points, got {}",
            degree + 1,
            ctrl.len()
        )));
    }
    if knots.len() != ctrl.len() + degree + 1 {
        return Err(Error::Validation(format!(
            "{} knots for {} control points of degree {degree}",
            knots.len(),
            ctrl.len()
        )));
    }
    if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("knot vector must be finite and nondecreasing".into()));
    }
    if ctrl.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
        return Err(Error::Validation("non-finite control point".into()));
    }
    if knots[ctrl.len()] <= knots[degree] {
        return Err(Error::Validation("empty parameter domain".into()));
    }
    Ok(())
}

impl BSplineCurve {
    pub fn new_open(degree: usize, knots: Vec<f64>, control_points: Vec<Point>) -> Result<Self> {
        check_common(degree, &knots, &control_points)?;
        let m = knots.len();
        let clamped_start = knots[..=degree].iter().all(|&k| k == knots[0]);
        let clamped_end = knots[m - degree - 1..].iter().all(|&k| k == knots[m - 1]);
        if !(clamped_start && clamped_end) {
            return Err(Error::Validation("open curves need a clamped knot vector".into()));
        }
        Ok(BSplineCurve { degree, knots, control_points, closed: false })
    }

    pub fn new_closed(degree: usize, knots: Vec<f64>, control_points: Vec<Point>) -> Result<Self> {
        check_common(degree, &knots, &control_points)?;
        let n = control_points.len();
        let unique = n - degree;
        if unique < 2 {
            return Err(Error::Validation("closed curve needs at least 2 unique control points".into()));
        }
        if (0..degree).any(|i| control_points[unique + i] != control_points[i]) {
            return Err(Error::Validation("closed curve must repeat its first `degree` control points".into()));
        }
        let period = knots[n] - knots[degree];
        let scale = period.abs().max(1.0);
        for j in 0..(knots.len() - unique) {
            let shifted = knots[j] + period;
            if (knots[j + unique] - shifted).abs() > 1e-9 * scale {
                return Err(Error::Validation("closed curve knot vector is not periodic".into()));
            }
        }
        Ok(BSplineCurve { degree, knots, control_points, closed: true })
    }

    /// Periodic curve from one period of knots (`base_knots[0] < ... < base_knots[0] + period`)
    /// and one control point per base knot.
    pub fn periodic(degree: usize, base_knots: &[f64], period: f64, unique: Vec<Point>) -> Result<Self> {
        let k = unique.len();
        if base_knots.len() != k {
            return Err(Error::Validation(format!("{} base knots for {k} control points", base_knots.len())));
        }
        if !(period > 0.0) {
            return Err(Error::Validation("period must be positive".into()));
        }
        let knots = periodic_knots(degree, base_knots, period);
        let mut ctrl = unique;
        for i in 0..degree {
            ctrl.push(ctrl[i % k]);
        }
        Self::new_closed(degree, knots, ctrl)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Number of independent control points (the periodic tail excluded).
    pub fn unique_control_count(&self) -> usize {
        if self.closed {
            self.control_points.len() - self.degree
        } else {
            self.control_points.len()
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.control_points.len()])
    }

    /// Replaces the independent control points, re-applying the periodic tail.
    pub fn with_unique_control_points(&self, unique: &[Point]) -> Result<Self> {
        if unique.len() != self.unique_control_count() {
            return Err(Error::Validation("control point count mismatch".into()));
        }
        let mut out = self.clone();
        out.control_points[..unique.len()].copy_from_slice(unique);
        if self.closed {
            for i in 0..self.degree {
                out.control_points[unique.len() + i] = unique[i];
            }
        }
        Ok(out)
    }

    fn normalize_parameter(&self, u: f64) -> Result<f64> {
        let (start, end) = self.domain();
        if !u.is_finite() {
            return Err(Error::Domain { u, start, end });
        }
        if self.closed {
            if u < start || u > end {
                return Ok(start + (u - start).rem_euclid(end - start));
            }
            return Ok(u);
        }
        let slack = DOMAIN_SLACK * (end - start).abs().max(1.0);
        if u < start - slack || u > end + slack {
            return Err(Error::Domain { u, start, end });
        }
        Ok(u.clamp(start, end))
    }

    /// Knot span index `i` with `knots[i] <= u < knots[i + 1]`, the domain end
    /// belonging to the last nonempty span.
    fn find_span(&self, u: f64) -> usize {
        let p = self.degree;
        let n = self.control_points.len();
        if u >= self.knots[n] {
            let mut i = n - 1;
            while i > p && self.knots[i] >= self.knots[n] {
                i -= 1;
            }
            return i;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Nonzero basis functions of degree `deg` at `u` on `span`.
    fn basis(&self, span: usize, u: f64, deg: usize) -> Vec<f64> {
        let mut n = vec![0.0; deg + 1];
        let mut left = vec![0.0; deg + 1];
        let mut right = vec![0.0; deg + 1];
        n[0] = 1.0;
        for j in 1..=deg {
            left[j] = u - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom != 0.0 { n[r] / denom } else { 0.0 };
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Control point indices and basis weights contributing at `u`. For closed
    /// curves the indices refer to unique control points.
    pub fn basis_row(&self, u: f64) -> Result<Vec<(usize, f64)>> {
        let u = self.normalize_parameter(u)?;
        let span = self.find_span(u);
        let k = self.unique_control_count();
        Ok(self
            .basis(span, u, self.degree)
            .into_iter()
            .enumerate()
            .map(|(j, w)| ((span - self.degree + j) % k, w))
            .collect())
    }

    pub fn evaluate(&self, u: f64) -> Result<Point> {
        let u = self.normalize_parameter(u)?;
        if !self.closed {
            // clamped ends interpolate exactly
            let (start, end) = self.domain();
            if u == start {
                return Ok(self.control_points[0]);
            }
            if u == end {
                return Ok(*self.control_points.last().expect("non-empty"));
            }
        }
        let span = self.find_span(u);
        let mut acc = Vec3::zeros();
        for (j, w) in self.basis(span, u, self.degree).into_iter().enumerate() {
            acc += self.control_points[span - self.degree + j].coords * w;
        }
        Ok(Point::from(acc))
    }

    /// First derivative with respect to the parameter.
    pub fn derivative(&self, u: f64) -> Result<Vec3> {
        let u = self.normalize_parameter(u)?;
        let p = self.degree;
        let span = self.find_span(u);
        let lower = self.basis(span, u, p - 1);
        let mut acc = Vec3::zeros();
        for (j, w) in lower.into_iter().enumerate() {
            let i = span - p + 1 + j;
            let denom = self.knots[i + p] - self.knots[i];
            if denom > 0.0 {
                acc += (self.control_points[i] - self.control_points[i - 1]) * (p as f64 * w / denom);
            }
        }
        Ok(acc)
    }
}

/// Full knot vector for a periodic curve with `base_knots.len()` unique
/// control points.
pub fn periodic_knots(degree: usize, base_knots: &[f64], period: f64) -> Vec<f64> {
    let k = base_knots.len() as i64;
    let p = degree as i64;
    (0..(k + 2 * p + 1))
        .map(|j| {
            let idx = j - p;
            let wraps = idx.div_euclid(k);
            base_knots[idx.rem_euclid(k) as usize] + period * wraps as f64
        })
        .collect()
}

/// Clamped knot vector over `[start, end]` with the given interior knots.
pub fn clamped_knots(degree: usize, start: f64, end: f64, interior: &[f64]) -> Vec<f64> {
    let mut knots = vec![start; degree + 1];
    knots.extend_from_slice(interior);
    knots.extend(std::iter::repeat_n(end, degree + 1));
    knots
}
