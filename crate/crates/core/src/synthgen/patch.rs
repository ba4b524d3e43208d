use std::f64::consts::TAU;

use rand::Rng;

use crate::geom::{Point, Vec3};

use super::primitive::{bezier_distance, plane_frame};

/// Jitter applied to each grid sample, as a fraction of the cell size.
pub const JITTER: f64 = 0.2;

/// Grid cells of size `r` that fit in `extent`, and the offset of the first
/// cell center so the leftover margin is split evenly.
fn grid_axis(extent: f64, r: f64) -> (usize, f64) {
    let n = ((extent / r) + 1e-9).floor().max(0.0) as usize;
    (n, 0.5 * (extent - n as f64 * r) + 0.5 * r)
}

/// A 2D region in a patch's local frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Polygon(Vec<[f64; 2]>),
    Disk { center: [f64; 2], radius: f64 },
    /// The part of a disk with `v >= center[1]`.
    HalfDisk { center: [f64; 2], radius: f64 },
    Difference(Box<Region>, Box<Region>),
}

impl Region {
    pub fn contains(&self, q: [f64; 2]) -> bool {
        match self {
            Region::Polygon(poly) => {
                let mut inside = false;
                let n = poly.len();
                for i in 0..n {
                    let (a, b) = (poly[i], poly[(i + 1) % n]);
                    if (a[1] > q[1]) != (b[1] > q[1]) {
                        let x = a[0] + (q[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if q[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            Region::Disk { center, radius } => (q[0] - center[0]).hypot(q[1] - center[1]) <= *radius,
            Region::HalfDisk { center, radius } => {
                q[1] >= center[1] && (q[0] - center[0]).hypot(q[1] - center[1]) <= *radius
            }
            Region::Difference(a, b) => a.contains(q) && !b.contains(q),
        }
    }

    /// `(min, max)` corners of a box enclosing the region.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Region::Polygon(poly) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in poly {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Region::Disk { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            Region::HalfDisk { center, radius } => {
                ([center[0] - radius, center[1]], [center[0] + radius, center[1] + radius])
            }
            Region::Difference(a, _) => a.bounds(),
        }
    }
}

/// A surface piece that points are sampled from.
#[derive(Debug, Clone, PartialEq)]
pub enum Patch {
    /// Planar region `origin + u * e1 + v * e2` for `(u, v)` in `region`.
    Planar { origin: Point, e1: Vec3, e2: Vec3, region: Region },
    /// Part of a cylinder wall: angles `[0, sweep]` measured from `start_dir`
    /// about `axis`, heights `[0, height]` from `base_center`.
    CylinderWall { base_center: Point, axis: Vec3, start_dir: Vec3, radius: f64, sweep: f64, height: f64 },
    /// Sheet over a rectangle with height `peak - slope * dist_xy(ridge)`.
    RidgeSheet { lo: [f64; 2], hi: [f64; 2], ridge: [[f64; 2]; 4], peak: f64, slope: f64 },
}

impl Patch {
    /// Planar polygon patch from 3D vertices listed around its boundary.
    pub fn polygon(vertices: &[Point]) -> Patch {
        Self::polygon_with_hole(vertices, None)
    }

    /// Planar polygon patch with an optional circular hole (3D center and radius).
    pub fn polygon_with_hole(vertices: &[Point], hole: Option<(Point, f64)>) -> Patch {
        let mut normal = Vec3::zeros();
        for i in 0..vertices.len() {
            let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
            normal += a.coords.cross(&b.coords);
        }
        let origin = vertices[0];
        let e1 = (vertices[1] - origin).normalize();
        let e2 = normal.normalize().cross(&e1);
        let to2 = |p: &Point| [(p - origin).dot(&e1), (p - origin).dot(&e2)];
        let mut region = Region::Polygon(vertices.iter().map(to2).collect());
        if let Some((c, radius)) = hole {
            region = Region::Difference(Box::new(region), Box::new(Region::Disk { center: to2(&c), radius }));
        }
        Patch::Planar { origin, e1, e2, region }
    }

    pub fn disk(center: Point, normal: Vec3, radius: f64) -> Patch {
        let (e1, e2) = plane_frame(&normal);
        Patch::Planar { origin: center, e1, e2, region: Region::Disk { center: [0.0, 0.0], radius } }
    }

    /// Jittered grid samples with cell size `r`, centered in the patch's
    /// parameter bounds so every sample keeps at least half a cell of margin before jitter.
    pub fn sample<R: Rng>(&self, r: f64, rng: &mut R, out: &mut Vec<Point>) {
        let jitter = |rng: &mut R| (rng.random::<f64>() * 2.0 - 1.0) * JITTER * r;
        match self {
            Patch::Planar { origin, e1, e2, region } => {
                let (lo, hi) = region.bounds();
                let (nu, ou) = grid_axis(hi[0] - lo[0], r);
                let (nv, ov) = grid_axis(hi[1] - lo[1], r);
                for i in 0..nu {
                    for j in 0..nv {
                        let q = [lo[0] + ou + i as f64 * r + jitter(rng), lo[1] + ov + j as f64 * r + jitter(rng)];
                        if region.contains(q) {
                            out.push(origin + e1 * q[0] + e2 * q[1]);
                        }
                    }
                }
            }
            Patch::CylinderWall { base_center, axis, start_dir, radius, sweep, height } => {
                let axis = axis.normalize();
                let e2 = axis.cross(start_dir);
                let arc = radius * sweep;
                // A full wall wraps around, so spread the columns evenly; a
                // partial wall keeps the half-cell margin at both ends.
                let (na, step, offset) = if (*sweep - TAU).abs() < 1e-12 {
                    let na = ((arc / r).round() as usize).max(1);
                    (na, arc / na as f64, 0.0)
                } else {
                    let (na, offset) = grid_axis(arc, r);
                    (na, r, offset)
                };
                let (nh, oh) = grid_axis(*height, r);
                for i in 0..na {
                    for j in 0..nh {
                        let s = offset + i as f64 * step + jitter(rng);
                        let h = oh + j as f64 * r + jitter(rng);
                        if offset > 0.0 && !(0.0..=arc).contains(&s) {
                            continue;
                        }
                        let ang = s / radius;
                        out.push(base_center + (start_dir * ang.cos() + e2 * ang.sin()) * *radius + axis * h);
                    }
                }
            }
            Patch::RidgeSheet { lo, hi, ridge, peak, slope } => {
                let ctrl = ridge.map(|c| Point::new(c[0], c[1], 0.0));
                let (nu, ou) = grid_axis(hi[0] - lo[0], r);
                let (nv, ov) = grid_axis(hi[1] - lo[1], r);
                for i in 0..nu {
                    for j in 0..nv {
                        let x = lo[0] + ou + i as f64 * r + jitter(rng);
                        let y = lo[1] + ov + j as f64 * r + jitter(rng);
                        let d = bezier_distance(&Point::new(x, y, 0.0), &ctrl);
                        out.push(Point::new(x, y, peak - slope * d));
                    }
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Patch::Planar { region, .. } => region_area(region),
            Patch::CylinderWall { radius, sweep, height, .. } => radius * sweep * height,
            Patch::RidgeSheet { lo, hi, .. } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
        }
    }
}

fn region_area(region: &Region) -> f64 {
    match region {
        Region::Polygon(p) => {
            let n = p.len();
            0.5 * (0..n).map(|i| p[i][0] * p[(i + 1) % n][1] - p[(i + 1) % n][0] * p[i][1]).sum::<f64>().abs()
        }
        Region::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        Region::HalfDisk { radius, .. } => 0.5 * std::f64::consts::PI * radius * radius,
        Region::Difference(a, b) => region_area(a) - region_area(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polygon_containment() {
        let l = Region::Polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]);
        assert!(l.contains([0.5, 1.5]));
        assert!(l.contains([1.5, 0.5]));
        assert!(!l.contains([1.5, 1.5]));
        let holed = Region::Difference(Box::new(l), Box::new(Region::Disk { center: [0.5, 0.5], radius: 0.2 }));
        assert!(!holed.contains([0.5, 0.5]));
        assert!(holed.contains([0.5, 0.8]));
    }

    #[test]
    fn sample_counts_track_area() {
        let r = 0.02;
        let patches = [
            Patch::polygon(&[
                Point::new(0.0, 0.0, 0.0),
                Point::new(1.0, 0.0, 0.0),
                Point::new(1.0, 1.0, 0.0),
                Point::new(0.0, 1.0, 0.0),
            ]),
            Patch::disk(Point::new(0.5, 0.5, 0.5), Vec3::new(1.0, 1.0, 0.0), 0.3),
            Patch::CylinderWall {
                base_center: Point::new(0.5, 0.5, 0.0),
                axis: Vec3::z(),
                start_dir: Vec3::x(),
                radius: 0.3,
                sweep: TAU,
                height: 0.6,
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for patch in &patches {
            let mut pts = Vec::new();
            patch.sample(r, &mut rng, &mut pts);
            let expected = patch.area() / (r * r);
            let ratio = pts.len() as f64 / expected;
            assert!((0.9..1.1).contains(&ratio), "{patch:?}: {} vs {expected}", pts.len());
        }
    }

    #[test]
    fn polygon_samples_stay_inside_and_on_plane() {
        let verts = [
            Point::new(0.0, 0.0, 1.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(0.0, 1.0, 1.0),
        ];
        let patch = Patch::polygon(&verts);
        let mut pts = Vec::new();
        patch.sample(0.05, &mut ChaCha8Rng::seed_from_u64(1), &mut pts);
        assert!(!pts.is_empty());
        for p in pts {
            assert!((p.x + p.z - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&p.y));
        }
    }
}
