//! Covariance eigen-analysis of small point sets.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::geom::{Point, Vec3};

#[derive(Debug, Clone, Copy)]
pub struct Pca {
    pub centroid: Point,
    /// Eigenvalues of the (population) covariance, ascending.
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors matching `eigenvalues`.
    pub axes: [Vec3; 3],
}

impl Pca {
    pub fn from_points<'a, I>(points: I) -> Option<Pca>
    where
        I: IntoIterator<Item = &'a Point>,
    {
        let pts: Vec<&Point> = points.into_iter().collect();
        if pts.is_empty() {
            return None;
        }
        let n = pts.len() as f64;
        let centroid = Point::from(pts.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n);
        let mut cov = Matrix3::zeros();
        for p in &pts {
            let d = *p - centroid;
            cov += d * d.transpose();
        }
        cov /= n;
        let eig = SymmetricEigen::new(cov);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.map(|k| eig.eigenvalues[k].max(0.0));
        let axes = order.map(|k| eig.eigenvectors.column(k).into_owned());
        Some(Pca { centroid, eigenvalues, axes })
    }

    /// Explained variance ratios `σ1 <= σ2 <= σ3` summing to one, or `None`
    /// when the set has no spread at all.
    pub fn variance_ratios(&self) -> Option<[f64; 3]> {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return None;
        }
        let mut s = self.eigenvalues.map(|l| l / total);
        // absorb rounding so the three ratios sum to exactly 1 (or within an ulp)
        s[2] = 1.0 - s[0] - s[1];
        Some(s)
    }

    /// Direction of maximal variance.
    pub fn principal_axis(&self) -> Vec3 {
        self.axes[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_have_rank_one_spread() {
        let pts: Vec<Point> = (0..10).map(|i| Point::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        let pca = Pca::from_points(&pts).unwrap();
        let s = pca.variance_ratios().unwrap();
        assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12);
        assert!((s[2] - 1.0).abs() < 1e-12);
        let axis = pca.principal_axis();
        assert!((axis.dot(&Vec3::new(1.0, 2.0, 0.0).normalize()).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_have_no_ratios() {
        let pts = vec![Point::new(1.0, 1.0, 1.0); 4];
        assert!(Pca::from_points(&pts).unwrap().variance_ratios().is_none());
    }
}
