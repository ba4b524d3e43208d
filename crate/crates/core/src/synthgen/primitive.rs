use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geom::{segment_distance, Aabb, Point, Vec3};
use crate::splines::{clamped_knots, BSplineCurve};

/// Cubic pieces used to represent a full circle in a ground-truth wireframe.
pub const CIRCLE_PIECES: usize = 64;
const MIN_SIZE: f64 = 1e-9;
/// Parameter width at which Bézier branch-and-bound hands over to a line search.
const LEAF_WIDTH: f64 = 1e-3;
const LINE_SEARCH_TOL: f64 = 1e-12;

/// A ground-truth feature curve with an exact distance function.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Segment {
        a: Point,
        b: Point,
    },
    /// Arc starting at `center + radius * start_dir`, turning by `sweep`
    /// radians counterclockwise about `normal`.
    Arc {
        center: Point,
        normal: Vec3,
        radius: f64,
        start_dir: Vec3,
        sweep: f64,
    },
    Circle {
        center: Point,
        normal: Vec3,
        radius: f64,
    },
    Bezier {
        ctrl: [Point; 4],
    },
}

fn bezier_point(c: &[Point; 4], t: f64) -> Point {
    let s = 1.0 - t;
    Point::from(
        c[0].coords * (s * s * s) + c[1].coords * (3.0 * s * s * t) + c[2].coords * (3.0 * s * t * t) + c[3].coords * (t * t * t),
    )
}

fn split_bezier(c: &[Point; 4]) -> ([Point; 4], [Point; 4]) {
    let m = |a: &Point, b: &Point| Point::from((a.coords + b.coords) * 0.5);
    let (p01, p12, p23) = (m(&c[0], &c[1]), m(&c[1], &c[2]), m(&c[2], &c[3]));
    let (p012, p123) = (m(&p01, &p12), m(&p12, &p23));
    let mid = m(&p012, &p123);
    ([c[0], p01, p012, mid], [mid, p123, p23, c[3]])
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > LINE_SEARCH_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Distance from `p` to a cubic Bézier by branch-and-bound over the control
/// polygon's bounding boxes, finished with a golden-section search.
pub fn bezier_distance(p: &Point, ctrl: &[Point; 4]) -> f64 {
    let mut best = (p - ctrl[0]).norm().min((p - ctrl[3]).norm());
    let mut stack = vec![(0.0f64, 1.0f64, *ctrl)];
    while let Some((t0, t1, c)) = stack.pop() {
        let bound = Aabb::from_points(c.iter()).expect("four points").distance(p);
        if bound >= best {
            continue;
        }
        let (left, right) = split_bezier(&c);
        best = best.min((p - left[3]).norm());
        if t1 - t0 < LEAF_WIDTH {
            let (_, f) = golden_section(|t| (p - bezier_point(ctrl, t)).norm_squared(), t0, t1);
            best = best.min(f.sqrt());
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let dl = Aabb::from_points(left.iter()).unwrap().distance(p);
        let dr = Aabb::from_points(right.iter()).unwrap().distance(p);
        if dl <= dr {
            stack.push((tm, t1, right));
            stack.push((t0, tm, left));
        } else {
            stack.push((t0, tm, left));
            stack.push((tm, t1, right));
        }
    }
    best
}

/// Orthonormal `(e1, e2)` spanning the plane with normal `n`.
pub fn plane_frame(n: &Vec3) -> (Vec3, Vec3) {
    let n = n.normalize();
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - n * helper.dot(&n)).normalize();
    (e1, n.cross(&e1))
}

/// Cubic Bézier chain for a circular arc, as a control list
/// `[J0, a0, b0, J1, a1, b1, ..., JN]`.
fn arc_chain(center: &Point, e1: &Vec3, e2: &Vec3, radius: f64, sweep: f64, pieces: usize) -> Vec<Point> {
    let phi = sweep / pieces as f64;
    let k = 4.0 / 3.0 * (phi / 4.0).tan();
    let at = |a: f64| center + (e1 * a.cos() + e2 * a.sin()) * radius;
    let tangent = |a: f64| (-e1 * a.sin() + e2 * a.cos()) * radius;
    let mut out = vec![at(0.0)];
    for i in 0..pieces {
        let (a0, a1) = (phi * i as f64, phi * (i + 1) as f64);
        out.push(at(a0) + tangent(a0) * k);
        out.push(at(a1) - tangent(a1) * k);
        out.push(at(a1));
    }
    out
}

fn chain_knots(pieces: usize, step: f64) -> Vec<f64> {
    let mut knots = vec![0.0; 4];
    for i in 1..pieces {
        knots.extend([step * i as f64; 3]);
    }
    knots.extend([step * pieces as f64; 4]);
    knots
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Primitive::Segment { a, b } => (b - a).norm() > MIN_SIZE,
            Primitive::Arc { normal, radius, start_dir, sweep, .. } => {
                *radius > MIN_SIZE
                    && normal.norm() > MIN_SIZE
                    && (start_dir.norm() - 1.0).abs() < 1e-9
                    && start_dir.dot(&normal.normalize()).abs() < 1e-9
                    && *sweep > 0.0
                    && *sweep < TAU
            }
            Primitive::Circle { normal, radius, .. } => *radius > MIN_SIZE && normal.norm() > MIN_SIZE,
            Primitive::Bezier { ctrl } => (ctrl[3] - ctrl[0]).norm() > MIN_SIZE,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("degenerate primitive {self:?}")))
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Primitive::Circle { .. })
    }

    /// Point at normalized parameter `t` in `[0, 1]`.
    pub fn point_at(&self, t: f64) -> Point {
        match self {
            Primitive::Segment { a, b } => a + (b - a) * t,
            Primitive::Arc { center, normal, radius, start_dir, sweep } => {
                let e2 = normal.normalize().cross(start_dir);
                let ang = sweep * t;
                center + (start_dir * ang.cos() + e2 * ang.sin()) * *radius
            }
            Primitive::Circle { center, normal, radius } => {
                let (e1, e2) = plane_frame(normal);
                let ang = TAU * t;
                center + (e1 * ang.cos() + e2 * ang.sin()) * *radius
            }
            Primitive::Bezier { ctrl } => bezier_point(ctrl, t),
        }
    }

    /// Open curves' end points.
    pub fn endpoints(&self) -> Option<(Point, Point)> {
        (!self.is_closed()).then(|| (self.point_at(0.0), self.point_at(1.0)))
    }

    pub fn distance(&self, p: &Point) -> f64 {
        match self {
            Primitive::Segment { a, b } => segment_distance(p, a, b),
            Primitive::Circle { center, normal, radius } => circle_distance(p, center, &normal.normalize(), *radius),
            Primitive::Arc { center, normal, radius, start_dir, sweep } => {
                let n = normal.normalize();
                let v = p - center;
                let w = v - n * v.dot(&n);
                let e2 = n.cross(start_dir);
                let ang = w.dot(&e2).atan2(w.dot(start_dir)).rem_euclid(TAU);
                if w.norm() == 0.0 || ang <= *sweep {
                    circle_distance(p, center, &n, *radius)
                } else {
                    (p - self.point_at(0.0)).norm().min((p - self.point_at(1.0)).norm())
                }
            }
            Primitive::Bezier { ctrl } => bezier_distance(p, ctrl),
        }
    }

    /// B-spline form used in ground-truth wireframes. Segments and Béziers
    /// are exact; circles and arcs are chains of cubic pieces.
    pub fn to_bspline(&self) -> BSplineCurve {
        match self {
            Primitive::Segment { a, b } => {
                BSplineCurve::new_open(1, clamped_knots(1, 0.0, (b - a).norm(), &[]), vec![*a, *b])
                    .expect("valid segment")
            }
            Primitive::Bezier { ctrl } => {
                BSplineCurve::new_open(3, clamped_knots(3, 0.0, 1.0, &[]), ctrl.to_vec()).expect("valid bezier")
            }
            Primitive::Arc { center, normal, radius, start_dir, sweep } => {
                let e2 = normal.normalize().cross(start_dir);
                let pieces = ((CIRCLE_PIECES as f64 * sweep / TAU).ceil() as usize).max(1);
                let ctrl = arc_chain(center, start_dir, &e2, *radius, *sweep, pieces);
                let step = radius * sweep / pieces as f64;
                BSplineCurve::new_open(3, chain_knots(pieces, step), ctrl).expect("valid arc")
            }
            Primitive::Circle { center, normal, radius } => {
                let (e1, e2) = plane_frame(normal);
                let n = CIRCLE_PIECES;
                let chain = arc_chain(center, &e1, &e2, *radius, TAU, n);
                // Rotate so the first span is piece 0: [a_{N-1}, b_{N-1}, J0, a0, b0, J1, ...].
                let mut unique = vec![chain[3 * n - 2], chain[3 * n - 1]];
                unique.extend_from_slice(&chain[..3 * n - 2]);
                let step = radius * TAU / n as f64;
                let base: Vec<f64> = (0..n).flat_map(|i| [step * i as f64; 3]).collect();
                BSplineCurve::periodic(3, &base, radius * TAU, unique).expect("valid circle")
            }
        }
    }
}

fn circle_distance(p: &Point, center: &Point, n: &Vec3, radius: f64) -> f64 {
    let v = p - center;
    let h = v.dot(n);
    let rho = (v - n * h).norm();
    ((rho - radius).powi(2) + h * h).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_distance(prim: &Primitive, p: &Point, n: usize) -> f64 {
        (0..=n).map(|i| (p - prim.point_at(i as f64 / n as f64)).norm()).fold(f64::INFINITY, f64::min)
    }

    fn samples() -> Vec<Primitive> {
        vec![
            Primitive::Segment { a: Point::new(0.1, 0.2, 0.3), b: Point::new(0.8, 0.4, 0.1) },
            Primitive::Circle { center: Point::new(0.5, 0.5, 0.5), normal: Vec3::new(0.3, -0.2, 1.0), radius: 0.3 },
            Primitive::Arc {
                center: Point::new(0.5, 0.5, 0.2),
                normal: Vec3::z(),
                radius: 0.25,
                start_dir: Vec3::x(),
                sweep: 4.0,
            },
            Primitive::Bezier {
                ctrl: [
                    Point::new(0.1, 0.1, 0.0),
                    Point::new(0.4, 0.9, 0.2),
                    Point::new(0.7, -0.3, 0.4),
                    Point::new(0.9, 0.5, 0.1),
                ],
            },
        ]
    }

    #[test]
    fn on_curve_points_have_zero_distance() {
        for prim in samples() {
            for i in 0..=200 {
                let p = prim.point_at(i as f64 / 200.0);
                assert!(prim.distance(&p) <= 1e-9, "{prim:?} at {i}");
            }
        }
    }

    #[test]
    fn segment_perpendicular_distance() {
        let s = Primitive::Segment { a: Point::new(-10.0, 0.0, 0.0), b: Point::new(10.0, 0.0, 0.0) };
        assert!((s.distance(&Point::new(0.3, 0.5, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bspline_forms_trace_the_primitive() {
        for prim in samples() {
            let c = prim.to_bspline();
            assert_eq!(c.is_closed(), prim.is_closed());
            let (s, e) = c.domain();
            for i in 0..=500 {
                let q = c.evaluate(s + (e - s) * i as f64 / 500.0).unwrap();
                assert!(prim.distance(&q) < 1e-9, "{prim:?}");
            }
            if let Some((a, b)) = prim.endpoints() {
                assert!((c.evaluate(s).unwrap() - a).norm() < 1e-12);
                assert!((c.evaluate(e).unwrap() - b).norm() < 1e-12);
            } else {
                assert!((c.evaluate(s).unwrap() - c.evaluate(e).unwrap()).norm() < 1e-12);
                assert!((c.derivative(s).unwrap() - c.derivative(e).unwrap()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_primitives_are_rejected() {
        let p = Point::new(0.5, 0.5, 0.5);
        assert!(Primitive::Segment { a: p, b: p }.validate().is_err());
        assert!(Primitive::Circle { center: p, normal: Vec3::z(), radius: -1.0 }.validate().is_err());
        assert!(Primitive::Arc { center: p, normal: Vec3::z(), radius: 0.2, start_dir: Vec3::x(), sweep: TAU }
            .validate()
            .is_err());
        for prim in samples() {
            prim.validate().unwrap();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_dense_sampling(x in -0.5..1.5f64, y in -0.5..1.5f64, z in -0.5..1.5f64) {
            let p = Point::new(x, y, z);
            for prim in samples() {
                let exact = prim.distance(&p);
                let dense = dense_distance(&prim, &p, 100_000);
                prop_assert!(exact <= dense + 1e-12);
                prop_assert!(dense - exact < 1e-4, "{:?}: {} vs {}", prim, exact, dense);
            }
        }
    }
}
