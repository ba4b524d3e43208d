//! Synthetic shapes with exact distance-to-feature fields.
//!
//! Each preset is a small CAD-like solid (or sheet) inside the unit cube
//! whose sharp edges are known analytically. Sampling its surface and
//! attaching exact distances gives a point cloud that the extraction
//! pipeline can be checked against.

mod patch;
mod primitive;

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::cloud::PointCloudField;
use crate::error::{Error, Result};
use crate::geom::{Point, Vec3};
use crate::wireframe::Wireframe;

pub use patch::{Patch, Region, JITTER};
pub use primitive::{bezier_distance, plane_frame, Primitive, CIRCLE_PIECES};

pub const PRESETS: &[&str] = &[
    "cube",
    "box",
    "l-bracket",
    "u-channel",
    "stepped-block",
    "closed-ring",
    "cylinder",
    "box-with-cylindrical-boss",
    "fillet-free-prism",
    "hex-prism",
    "frustum",
    "bezier-ridge-plate",
    "half-cylinder",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticShape {
    pub name: String,
    pub corners: Vec<Point>,
    pub curves: Vec<Primitive>,
    pub patches: Vec<Patch>,
}

impl SyntheticShape {
    pub fn truth_wireframe(&self) -> Wireframe {
        Wireframe { corners: self.corners.clone(), curves: self.curves.iter().map(Primitive::to_bspline).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.curves {
            c.validate()?;
            if let Some((a, b)) = c.endpoints() {
                for end in [a, b] {
                    if !self.corners.iter().any(|k| (k - end).norm() < 1e-9) {
                        return Err(Error::Validation(format!("{}: curve end {end:?} is not a corner", self.name)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Uniformly scales the shape about the center of the unit cube.
    fn scaled(mut self, s: f64) -> Self {
        let c = Point::new(0.5, 0.5, 0.5);
        let sp = |p: &Point| c + (p - c) * s;
        let s2 = |q: [f64; 2]| [0.5 + (q[0] - 0.5) * s, 0.5 + (q[1] - 0.5) * s];
        for k in &mut self.corners {
            *k = sp(k);
        }
        for curve in &mut self.curves {
            match curve {
                Primitive::Segment { a, b } => {
                    *a = sp(a);
                    *b = sp(b);
                }
                Primitive::Arc { center, radius, .. } | Primitive::Circle { center, radius, .. } => {
                    *center = sp(center);
                    *radius *= s;
                }
                Primitive::Bezier { ctrl } => *ctrl = ctrl.map(|p| sp(&p)),
            }
        }
        for patch in &mut self.patches {
            match patch {
                Patch::Planar { origin, region, .. } => {
                    *origin = sp(origin);
                    scale_region(region, s);
                }
                Patch::CylinderWall { base_center, radius, height, .. } => {
                    *base_center = sp(base_center);
                    *radius *= s;
                    *height *= s;
                }
                Patch::RidgeSheet { lo, hi, ridge, peak, .. } => {
                    *lo = s2(*lo);
                    *hi = s2(*hi);
                    *ridge = ridge.map(s2);
                    *peak = 0.5 + (*peak - 0.5) * s;
                }
            }
        }
        self
    }
}

fn scale_region(region: &mut Region, s: f64) {
    match region {
        Region::Polygon(poly) => poly.iter_mut().for_each(|v| *v = [v[0] * s, v[1] * s]),
        Region::Disk { center, radius } | Region::HalfDisk { center, radius } => {
            *center = [center[0] * s, center[1] * s];
            *radius *= s;
        }
        Region::Difference(a, b) => {
            scale_region(a, s);
            scale_region(b, s);
        }
    }
}

/// Solid bounded by planar polygon faces; every face edge is a feature curve.
fn polyhedron(name: &str, vertices: Vec<Point>, faces: &[Vec<usize>]) -> SyntheticShape {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for f in faces {
        for i in 0..f.len() {
            let (a, b) = (f[i], f[(i + 1) % f.len()]);
            let e = (a.min(b), a.max(b));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    edges.sort();
    SyntheticShape {
        name: name.to_string(),
        curves: edges.iter().map(|&(a, b)| Primitive::Segment { a: vertices[a], b: vertices[b] }).collect(),
        patches: faces.iter().map(|f| Patch::polygon(&f.iter().map(|&i| vertices[i]).collect::<Vec<_>>())).collect(),
        corners: vertices,
    }
}

/// Extrudes a counterclockwise xy profile between heights `z0` and `z1`.
fn prism(name: &str, profile: &[[f64; 2]], z0: f64, z1: f64) -> SyntheticShape {
    let n = profile.len();
    let mut vertices: Vec<Point> = profile.iter().map(|v| Point::new(v[0], v[1], z0)).collect();
    vertices.extend(profile.iter().map(|v| Point::new(v[0], v[1], z1)));
    let mut faces = vec![(0..n).rev().collect::<Vec<_>>(), (n..2 * n).collect()];
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push(vec![i, j, n + j, n + i]);
    }
    polyhedron(name, vertices, &faces)
}

fn regular_polygon(sides: usize, center: [f64; 2], radius: f64) -> Vec<[f64; 2]> {
    (0..sides)
        .map(|i| {
            let a = TAU * i as f64 / sides as f64 + PI / 2.0;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect()
}

fn horizontal_circle(center: Point, radius: f64) -> Primitive {
    Primitive::Circle { center, normal: Vec3::z(), radius }
}

fn full_wall(base: Point, radius: f64, height: f64) -> Patch {
    Patch::CylinderWall { base_center: base, axis: Vec3::z(), start_dir: Vec3::x(), radius, sweep: TAU, height }
}

fn cylinder() -> SyntheticShape {
    let (c, r, z0, z1) = ([0.5, 0.5], 0.3, 0.2, 0.8);
    SyntheticShape {
        name: "cylinder".into(),
        corners: vec![],
        curves: vec![
            horizontal_circle(Point::new(c[0], c[1], z0), r),
            horizontal_circle(Point::new(c[0], c[1], z1), r),
        ],
        patches: vec![
            Patch::disk(Point::new(c[0], c[1], z0), Vec3::z(), r),
            Patch::disk(Point::new(c[0], c[1], z1), Vec3::z(), r),
            full_wall(Point::new(c[0], c[1], z0), r, z1 - z0),
        ],
    }
}

fn closed_ring() -> SyntheticShape {
    let (r, z0, z1) = (0.35, 0.2, 0.7);
    let top = Point::new(0.5, 0.5, z1);
    SyntheticShape {
        name: "closed-ring".into(),
        corners: vec![],
        curves: vec![horizontal_circle(top, r)],
        patches: vec![Patch::disk(top, Vec3::z(), r), full_wall(Point::new(0.5, 0.5, z0), r, z1 - z0)],
    }
}

fn box_with_boss() -> SyntheticShape {
    let mut shape = prism("box-with-cylindrical-boss", &[[0.1, 0.1], [0.9, 0.1], [0.9, 0.9], [0.1, 0.9]], 0.1, 0.4);
    let (r, z0, z1) = (0.2, 0.4, 0.7);
    let base = Point::new(0.5, 0.5, z0);
    let top = Point::new(0.5, 0.5, z1);
    // faces[1] is the top of the box; punch the boss footprint out of it
    let top_face: Vec<Point> = shape.corners[4..8].to_vec();
    shape.patches[1] = Patch::polygon_with_hole(&top_face, Some((base, r)));
    shape.curves.push(horizontal_circle(base, r));
    shape.curves.push(horizontal_circle(top, r));
    shape.patches.push(full_wall(base, r, z1 - z0));
    shape.patches.push(Patch::disk(top, Vec3::z(), r));
    shape
}

fn frustum() -> SyntheticShape {
    let (lo, hi) = ((0.1, 0.9), (0.3, 0.7));
    let (z0, z1) = (0.2, 0.8);
    let ring = |(a, b): (f64, f64), z: f64| {
        vec![Point::new(a, a, z), Point::new(b, a, z), Point::new(b, b, z), Point::new(a, b, z)]
    };
    let mut vertices = ring(lo, z0);
    vertices.extend(ring(hi, z1));
    let mut faces = vec![vec![3, 2, 1, 0], vec![4, 5, 6, 7]];
    for i in 0..4 {
        let j = (i + 1) % 4;
        faces.push(vec![i, j, 4 + j, 4 + i]);
    }
    polyhedron("frustum", vertices, &faces)
}

fn half_cylinder() -> SyntheticShape {
    let (c, r, z0, z1) = ([0.5, 0.3], 0.4, 0.2, 0.8);
    let at = |x: f64, z: f64| Point::new(x, c[1], z);
    let (a0, b0, a1, b1) = (at(c[0] + r, z0), at(c[0] - r, z0), at(c[0] + r, z1), at(c[0] - r, z1));
    let arc = |z: f64| Primitive::Arc {
        center: Point::new(c[0], c[1], z),
        normal: Vec3::z(),
        radius: r,
        start_dir: Vec3::x(),
        sweep: PI,
    };
    let cap = |z: f64| Patch::Planar {
        origin: Point::new(0.0, 0.0, z),
        e1: Vec3::x(),
        e2: Vec3::y(),
        region: Region::HalfDisk { center: c, radius: r },
    };
    SyntheticShape {
        name: "half-cylinder".into(),
        corners: vec![a0, b0, a1, b1],
        curves: vec![
            arc(z0),
            arc(z1),
            Primitive::Segment { a: a0, b: b0 },
            Primitive::Segment { a: a1, b: b1 },
            Primitive::Segment { a: a0, b: a1 },
            Primitive::Segment { a: b0, b: b1 },
        ],
        patches: vec![
            Patch::polygon(&[a0, a1, b1, b0]),
            Patch::CylinderWall {
                base_center: Point::new(c[0], c[1], z0),
                axis: Vec3::z(),
                start_dir: Vec3::x(),
                radius: r,
                sweep: PI,
                height: z1 - z0,
            },
            cap(z0),
            cap(z1),
        ],
    }
}

fn bezier_ridge_plate() -> SyntheticShape {
    let ridge = [[0.25, 0.3], [0.4, 0.8], [0.6, 0.2], [0.75, 0.7]];
    let peak = 0.5;
    let ctrl = ridge.map(|q| Point::new(q[0], q[1], peak));
    SyntheticShape {
        name: "bezier-ridge-plate".into(),
        corners: vec![ctrl[0], ctrl[3]],
        curves: vec![Primitive::Bezier { ctrl }],
        patches: vec![Patch::RidgeSheet { lo: [0.1, 0.1], hi: [0.9, 0.9], ridge, peak, slope: 0.25 }],
    }
}

/// Builds a named preset, uniformly scaled by `scale` in `(0, 1]` about the
/// center of the unit cube.
pub fn make_shape(name: &str, scale: f64) -> Result<SyntheticShape> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::Argument(format!("shape scale must lie in (0, 1], got {scale}")));
    }
    let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let shape = match name {
        "cube" => prism("cube", &square, 0.0, 1.0),
        "box" => prism("box", &[[0.1, 0.2], [0.9, 0.2], [0.9, 0.8], [0.1, 0.8]], 0.3, 0.7),
        "l-bracket" => prism(
            "l-bracket",
            &[[0.1, 0.1], [0.9, 0.1], [0.9, 0.4], [0.4, 0.4], [0.4, 0.9], [0.1, 0.9]],
            0.25,
            0.75,
        ),
        "u-channel" => prism(
            "u-channel",
            &[[0.1, 0.1], [0.9, 0.1], [0.9, 0.8], [0.65, 0.8], [0.65, 0.35], [0.35, 0.35], [0.35, 0.8], [0.1, 0.8]],
            0.2,
            0.8,
        ),
        "stepped-block" => prism(
            "stepped-block",
            &[[0.1, 0.1], [0.9, 0.1], [0.9, 0.37], [0.63, 0.37], [0.63, 0.63], [0.37, 0.63], [0.37, 0.9], [0.1, 0.9]],
            0.2,
            0.8,
        ),
        "closed-ring" => closed_ring(),
        "cylinder" => cylinder(),
        "box-with-cylindrical-boss" => box_with_boss(),
        "fillet-free-prism" => prism("fillet-free-prism", &regular_polygon(5, [0.5, 0.5], 0.4), 0.2, 0.8),
        "hex-prism" => prism("hex-prism", &regular_polygon(6, [0.5, 0.5], 0.4), 0.25, 0.75),
        "frustum" => frustum(),
        "bezier-ridge-plate" => bezier_ridge_plate(),
        "half-cylinder" => half_cylinder(),
        other => {
            return Err(Error::Argument(format!("unknown preset '{other}', expected one of: {}", PRESETS.join(", "))))
        }
    };
    let shape = if scale == 1.0 { shape } else { shape.scaled(scale) };
    shape.validate()?;
    Ok(shape)
}

/// Distance from `p` to the nearest feature curve, clipped to `[0, 1]`.
pub fn exact_distance(p: &Point, shape: &SyntheticShape) -> f64 {
    shape.curves.iter().map(|c| c.distance(p)).fold(f64::INFINITY, f64::min).min(1.0)
}

/// Samples the shape's surface on a jittered grid of spacing `r`, adds
/// isotropic Gaussian noise, and attaches exact distances at the final
/// positions. The result depends only on the arguments.
pub fn sample_field(shape: &SyntheticShape, r: f64, noise_sigma: f64, seed: u64) -> Result<PointCloudField> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("sampling distance must be positive, got {r}")));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::Argument(format!("noise sigma must be non-negative, got {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for patch in &shape.patches {
        patch.sample(r, &mut rng, &mut points);
    }
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::Argument(e.to_string()))?;
        for p in &mut points {
            *p += Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    let distances: Vec<f64> = points.par_iter().map(|p| exact_distance(p, shape)).collect();
    PointCloudField::new(points, distances, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn count_segments(s: &SyntheticShape) -> usize {
        s.curves.iter().filter(|c| matches!(c, Primitive::Segment { .. })).count()
    }

    #[test]
    fn preset_topology() {
        let cube = make_shape("cube", 1.0).unwrap();
        assert_eq!((cube.corners.len(), cube.curves.len(), count_segments(&cube)), (8, 12, 12));
        let ring = make_shape("closed-ring", 1.0).unwrap();
        assert_eq!(ring.corners.len(), 0);
        assert_eq!(ring.curves.len(), 1);
        assert!(ring.curves[0].is_closed());
        let l = make_shape("l-bracket", 1.0).unwrap();
        assert_eq!((l.corners.len(), count_segments(&l)), (12, 18));
        // V - E + F = 2 for the closed polyhedral presets
        for name in ["cube", "box", "l-bracket", "u-channel", "stepped-block", "fillet-free-prism", "hex-prism", "frustum"] {
            let s = make_shape(name, 1.0).unwrap();
            let euler = s.corners.len() as i64 - s.curves.len() as i64 + s.patches.len() as i64;
            assert_eq!(euler, 2, "{name}");
        }
    }

    #[test]
    fn all_presets_build_inside_unit_cube() {
        assert!(PRESETS.len() >= 10);
        for name in PRESETS {
            let s = make_shape(name, 1.0).unwrap();
            for c in &s.curves {
                for i in 0..=50 {
                    let p = c.point_at(i as f64 / 50.0);
                    assert!(p.coords.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)), "{name}");
                }
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(make_shape("cube", -1.0), Err(Error::Argument(_))));
        assert!(matches!(make_shape("cube", 0.0), Err(Error::Argument(_))));
        let err = make_shape("teapot", 1.0).unwrap_err().to_string();
        assert!(err.contains("cube") && err.contains("half-cylinder"));
        let cube = make_shape("cube", 1.0).unwrap();
        assert!(sample_field(&cube, 0.0, 0.0, 1).is_err());
        assert!(sample_field(&cube, 0.02, -0.1, 1).is_err());
    }

    #[test]
    fn scaled_shape_stays_consistent() {
        for name in PRESETS {
            let s = make_shape(name, 0.5).unwrap();
            let cloud = sample_field(&s, 0.04, 0.0, 2).unwrap();
            assert!(cloud.len() > 50, "{name}");
        }
    }

    #[test]
    fn cube_point_count_near_area_estimate() {
        let cube = make_shape("cube", 1.0).unwrap();
        let cloud = sample_field(&cube, 0.02, 0.0, 7).unwrap();
        let expected = 6.0 / (0.02 * 0.02);
        assert!((cloud.len() as f64 - expected).abs() <= 0.2 * expected, "{}", cloud.len());
    }

    #[test]
    fn noiseless_distances_are_exact_and_seeded() {
        let shape = make_shape("box-with-cylindrical-boss", 1.0).unwrap();
        let a = sample_field(&shape, 0.03, 0.0, 11).unwrap();
        for (p, &d) in a.points().iter().zip(a.distances()) {
            assert_eq!(d.to_bits(), exact_distance(p, &shape).to_bits());
        }
        let b = sample_field(&shape, 0.03, 0.0, 11).unwrap();
        assert_eq!(a, b);
        let noisy = sample_field(&shape, 0.03, 0.005, 11).unwrap();
        assert_eq!(noisy.len(), a.len());
        assert_ne!(noisy.points(), a.points());
    }

    #[test]
    fn skeleton_threshold_matches_true_distance() {
        let shape = make_shape("cube", 1.0).unwrap();
        let r = 0.02;
        let cloud = sample_field(&shape, r, 0.0, 5).unwrap();
        let skel = crate::corners::extract_skeleton(&cloud, 1.5 * r).unwrap();
        let near = cloud.points().iter().filter(|p| exact_distance(p, &shape) <= 1.5 * r).count();
        assert!(skel.len() as f64 >= 0.99 * near as f64);
        assert!(skel.positions.iter().all(|p| exact_distance(p, &shape) <= 1.5 * r));
    }

    #[test]
    fn distance_is_one_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for name in PRESETS {
            let s = make_shape(name, 1.0).unwrap();
            for _ in 0..300 {
                let p = Point::new(rng.random(), rng.random(), rng.random());
                let q = p + Vec3::new(rng.random(), rng.random(), rng.random()) * 0.1 - Vec3::repeat(0.05);
                let gap = (exact_distance(&p, &s) - exact_distance(&q, &s)).abs();
                assert!(gap <= (p - q).norm() + 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn truth_wireframes_round_trip() {
        for name in PRESETS {
            let w = make_shape(name, 1.0).unwrap().truth_wireframe();
            assert!(w.unanchored_curves(1e-9).is_empty(), "{name}");
            let back = Wireframe::from_json(&w.to_json().unwrap()).unwrap();
            assert_eq!(back.curves.len(), w.curves.len());
        }
    }
}
