use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::fmt_sig9;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::metrics::sample_curve;
use crate::splines::BSplineCurve;

/// Endpoint/corner coincidence tolerance.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

/// Corner points plus the curves running between them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawWireframe", into = "RawWireframe")]
pub struct Wireframe {
    pub corners: Vec<Point>,
    pub curves: Vec<BSplineCurve>,
}

#[derive(Serialize, Deserialize)]
struct RawWireframe {
    corners: Vec<[f64; 3]>,
    curves: Vec<BSplineCurve>,
}

impl TryFrom<RawWireframe> for Wireframe {
    type Error = Error;

    fn try_from(raw: RawWireframe) -> Result<Self> {
        if raw.corners.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite corner coordinate".into()));
        }
        Ok(Wireframe {
            corners: raw.corners.iter().map(|c| Point::new(c[0], c[1], c[2])).collect(),
            curves: raw.curves,
        })
    }
}

impl From<Wireframe> for RawWireframe {
    fn from(w: Wireframe) -> Self {
        RawWireframe { corners: w.corners.iter().map(|p| [p.x, p.y, p.z]).collect(), curves: w.curves }
    }
}

impl Wireframe {
    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Open curves whose ends are not within `tol` of some corner.
    pub fn unanchored_curves(&self, tol: f64) -> Vec<usize> {
        let near_corner = |p: Point| self.corners.iter().any(|c| (c - p).norm() <= tol);
        self.curves
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_closed())
            .filter(|(_, c)| {
                let (s, e) = c.domain();
                let ends = [c.evaluate(s), c.evaluate(e)];
                !ends.iter().all(|p| p.as_ref().map(|p| near_corner(*p)).unwrap_or(false))
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Samples every curve at roughly `spacing` and writes one OBJ line
    /// element per curve. Closed curves repeat their first vertex.
    pub fn to_obj(&self, spacing: f64) -> Result<String> {
        let mut out = String::new();
        let mut base = 1;
        for curve in &self.curves {
            let pts = sample_curve(curve, spacing)?;
            for p in &pts {
                writeln!(out, "v {} {} {}", fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z)).unwrap();
            }
            let mut idx: Vec<usize> = (base..base + pts.len()).collect();
            if curve.is_closed() {
                idx.push(base);
            }
            let joined: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            writeln!(out, "l {}", joined.join(" ")).unwrap();
            base += pts.len();
        }
        Ok(out)
    }

    /// Curve samples as XYZD text with every distance zero.
    pub fn to_xyzd_samples(&self, spacing: f64) -> Result<String> {
        let mut out = String::new();
        for curve in &self.curves {
            for p in sample_curve(curve, spacing)? {
                writeln!(out, "{} {} {} 0", fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z)).unwrap();
            }
        }
        Ok(out)
    }
}
