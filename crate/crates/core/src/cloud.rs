//! Point clouds with a distance-to-feature field, and the XYZD text format.
//!
//! XYZD is one point per line, `x y z d`, whitespace separated. An optional
//! `# r=<float>` header carries the sampling distance; other `#` lines are
//! comments. Values are written with 9 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::spatial::KdTree;

/// Fewest points a file may hold; the sampling distance needs a neighbor.
pub const MIN_LOAD_POINTS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudField {
    points: Vec<Point>,
    distances: Vec<f64>,
    sampling_distance: f64,
}

impl PointCloudField {
    pub fn new(points: Vec<Point>, distances: Vec<f64>, sampling_distance: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooSmall { found: 0, required: 1 });
        }
        if points.len() != distances.len() {
            return Err(Error::Validation(format!(
                "{} points but {} distances",
                points.len(),
                distances.len()
            )));
        }
        if let Some((i, d)) = distances.iter().enumerate().find(|(_, d)| !(0.0..=1.0).contains(*d)) {
            return Err(Error::Validation(format!("distance {d} at point {i} outside [0, 1]")));
        }
        if let Some(i) = points.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::Validation(format!("non-finite coordinate at point {i}")));
        }
        if !(sampling_distance > 0.0 && sampling_distance.is_finite()) {
            return Err(Error::Validation(format!(
                "sampling distance must be positive, got {sampling_distance}"
            )));
        }
        Ok(PointCloudField { points, distances, sampling_distance })
    }

    /// Builds a cloud and estimates the sampling distance from the points.
    pub fn with_estimated_spacing(points: Vec<Point>, distances: Vec<f64>) -> Result<Self> {
        let r = estimate_sampling_distance(&points)?;
        Self::new(points, distances, r)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn sampling_distance(&self) -> f64 {
        self.sampling_distance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Mean nearest-neighbor distance.
pub fn estimate_sampling_distance(points: &[Point]) -> Result<f64> {
    if points.len() < MIN_LOAD_POINTS {
        return Err(Error::TooSmall { found: points.len(), required: MIN_LOAD_POINTS });
    }
    let tree = KdTree::new(points);
    let sum: f64 = (0..points.len())
        .map(|i| tree.nearest_other_distance(i).unwrap_or(0.0))
        .sum();
    let r = sum / points.len() as f64;
    if r > 0.0 {
        Ok(r)
    } else {
        Err(Error::Validation("all points coincide; cannot estimate spacing".into()))
    }
}

/// The thresholded subset of a cloud lying close to feature curves.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpSkeleton {
    pub parent_indices: Vec<usize>,
    pub positions: Vec<Point>,
    pub distances: Vec<f64>,
}

impl SharpSkeleton {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> SharpSkeleton {
        SharpSkeleton {
            parent_indices: indices.iter().map(|&i| self.parent_indices[i]).collect(),
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            distances: indices.iter().map(|&i| self.distances[i]).collect(),
        }
    }
}

pub fn parse_xyzd(text: &str) -> Result<(Vec<Point>, Vec<f64>, Option<f64>)> {
    let mut points = Vec::new();
    let mut distances = Vec::new();
    let mut r = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let line_no = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("r=") {
                let v: f64 = value.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad sampling distance header `{line}`"),
                })?;
                r = Some(v);
            }
            continue;
        }
        let mut fields = [0.0f64; 4];
        let mut count = 0;
        for tok in line.split_whitespace() {
            if count == 4 {
                return Err(Error::Parse { line: line_no, message: "expected 4 values, found more".into() });
            }
            fields[count] = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("cannot parse `{tok}` as a number"),
            })?;
            count += 1;
        }
        if count != 4 {
            return Err(Error::Parse { line: line_no, message: format!("expected 4 values, found {count}") });
        }
        points.push(Point::new(fields[0], fields[1], fields[2]));
        distances.push(fields[3]);
    }
    Ok((points, distances, r))
}

pub fn read_xyzd(text: &str) -> Result<PointCloudField> {
    let (points, distances, r) = parse_xyzd(text)?;
    if points.len() < MIN_LOAD_POINTS {
        return Err(Error::TooSmall { found: points.len(), required: MIN_LOAD_POINTS });
    }
    match r {
        Some(r) => PointCloudField::new(points, distances, r),
        None => PointCloudField::with_estimated_spacing(points, distances),
    }
}

pub fn load_point_cloud(path: impl AsRef<Path>) -> Result<PointCloudField> {
    read_xyzd(&fs::read_to_string(path)?)
}

/// Shortest decimal that survives rounding to 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded}")
}

pub fn write_xyzd(cloud: &PointCloudField) -> String {
    let mut out = String::with_capacity(cloud.len() * 40);
    let _ = writeln!(out, "# r={}", fmt_sig9(cloud.sampling_distance()));
    for (p, d) in cloud.points().iter().zip(cloud.distances()) {
        let _ = writeln!(out, "{} {} {} {}", fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z), fmt_sig9(*d));
    }
    out
}

pub fn save_point_cloud(cloud: &PointCloudField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_xyzd(cloud))?;
    Ok(())
}
