//! Small geometric helpers shared by every stage.

use nalgebra::{Point3, Vector3};

pub type Point = Point3<f64>;
pub type Vec3 = Vector3<f64>;

/// Closest point on the closed segment `[a, b]` to `p`.
///
/// Returns the barycentric parameter `s` in `[0, 1]` (foot = a + s (b - a))
/// together with the foot point itself.
pub fn project_to_segment(p: &Point, a: &Point, b: &Point) -> (f64, Point) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= 0.0 {
        return (0.0, *a);
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (s, a + ab * s)
}

pub fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let (_, foot) = project_to_segment(p, a, b);
    (p - foot).norm()
}

pub fn centroid<'a, I>(points: I) -> Option<Point>
where
    I: IntoIterator<Item = &'a Point>,
{
    let mut sum = Vec3::zeros();
    let mut n = 0usize;
    for p in points {
        sum += p.coords;
        n += 1;
    }
    (n > 0).then(|| Point::from(sum / n as f64))
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Point>,
    {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = Aabb { min: first, max: first };
        for p in it {
            bb.grow(p);
        }
        Some(bb)
    }

    pub fn grow(&mut self, p: &Point) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    /// Inclusive containment test.
    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn distance(&self, p: &Point) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let excess = (self.min[k] - p[k]).max(p[k] - self.max[k]).max(0.0);
            d2 += excess * excess;
        }
        d2.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_clamps_to_segment_ends() {
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.0);
        let (s, foot) = project_to_segment(&Point::new(2.0, 1.0, 0.0), &a, &b);
        assert_eq!(s, 1.0);
        assert_eq!(foot, b);
        let (s, foot) = project_to_segment(&Point::new(0.25, 3.0, 0.0), &a, &b);
        assert!((s - 0.25).abs() < 1e-15);
        assert!((foot - Point::new(0.25, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_segment_projects_to_its_point() {
        let a = Point::new(1.0, 2.0, 3.0);
        assert_eq!(segment_distance(&Point::new(1.0, 2.0, 4.0), &a, &a), 1.0);
    }

    #[test]
    fn aabb_distance_is_zero_inside() {
        let bb = Aabb::from_points(&[Point::origin(), Point::new(1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(bb.distance(&Point::new(0.5, 0.5, 0.5)), 0.0);
        assert!((bb.distance(&Point::new(2.0, 0.5, 0.5)) - 1.0).abs() < 1e-15);
        assert!(bb.contains(&Point::new(1.0, 0.0, 1.0)));
    }
}
