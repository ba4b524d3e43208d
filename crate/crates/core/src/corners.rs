//! Sharp skeleton extraction and corner detection.
//!
//! Query balls are placed by farthest point sampling over the skeleton. Each
//! ball is labelled corner-like when its middle explained-variance ratio
//! exceeds a threshold. Every member of a ball then receives a weight update
//! driven by its field value, normalized inside the ball: corner balls add
//! `1 - φ`, curve balls subtract `φ`. Points whose accumulated weight clears
//! `t_corner` seed corner clusters.

use rayon::prelude::*;

use crate::cloud::{PointCloudField, SharpSkeleton};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Point, Vec3};
use crate::pca::Pca;
use crate::sampling::farthest_point_sampling;
use crate::segmentation::DisjointSet;
use crate::spatial::KdTree;

/// Neighborhoods with fewer members are always labelled as curve.
pub const MIN_NEIGHBORHOOD: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodLabel {
    pub center_index: usize,
    pub member_indices: Vec<usize>,
    /// Explained variance ratios, ascending.
    pub sigma: [f64; 3],
    pub is_corner: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerCluster {
    /// Skeleton indices inside the cluster's bounding box (sorted).
    pub member_indices: Vec<usize>,
    /// Candidates whose weight exceeded the threshold (sorted).
    pub seed_indices: Vec<usize>,
    pub bbox_min: Point,
    pub bbox_max: Point,
    /// Centroid of `member_indices`.
    pub center: Point,
}

pub fn extract_skeleton(cloud: &PointCloudField, t_dist: f64) -> Result<SharpSkeleton> {
    if !(t_dist > 0.0) {
        return Err(Error::Argument(format!("t_dist must be positive, got {t_dist}")));
    }
    let mut skeleton = SharpSkeleton {
        parent_indices: Vec::new(),
        positions: Vec::new(),
        distances: Vec::new(),
    };
    for (i, (p, &d)) in cloud.points().iter().zip(cloud.distances()).enumerate() {
        if d <= t_dist {
            skeleton.parent_indices.push(i);
            skeleton.positions.push(*p);
            skeleton.distances.push(d);
        }
    }
    if skeleton.is_empty() {
        return Err(Error::NoSharpFeatures);
    }
    Ok(skeleton)
}

/// Explained variance ratios of a member set, with the degenerate cases
/// folded into a rank-one answer.
fn ratios_of(positions: &[Point], members: &[usize]) -> [f64; 3] {
    Pca::from_points(members.iter().map(|&i| &positions[i]))
        .and_then(|pca| pca.variance_ratios())
        .unwrap_or([0.0, 0.0, 1.0])
}

pub fn classify_neighborhoods(
    skeleton: &SharpSkeleton,
    fps_ratio: f64,
    r_corner: f64,
    t_variance: f64,
) -> Result<Vec<NeighborhoodLabel>> {
    if !(fps_ratio > 0.0 && fps_ratio <= 1.0) {
        return Err(Error::Argument(format!("fps_ratio must be in (0, 1], got {fps_ratio}")));
    }
    if !(r_corner > 0.0) {
        return Err(Error::Argument(format!("r_corner must be positive, got {r_corner}")));
    }
    if skeleton.is_empty() {
        return Ok(Vec::new());
    }
    let count = ((fps_ratio * skeleton.len() as f64).ceil() as usize).clamp(1, skeleton.len());
    let centers = farthest_point_sampling(&skeleton.positions, count)?;
    let tree = KdTree::new(&skeleton.positions);
    Ok(centers
        .par_iter()
        .map(|&center_index| {
            let member_indices = tree.radius_query(&skeleton.positions[center_index], r_corner);
            let sigma = ratios_of(&skeleton.positions, &member_indices);
            let is_corner = member_indices.len() >= MIN_NEIGHBORHOOD && sigma[1] > t_variance;
            NeighborhoodLabel { center_index, member_indices, sigma, is_corner }
        })
        .collect())
}

pub fn cornerness_weights(skeleton: &SharpSkeleton, labels: &[NeighborhoodLabel]) -> Vec<f64> {
    let mut w = vec![0.0; skeleton.len()];
    for label in labels {
        let (lo, hi) = label
            .member_indices
            .iter()
            .map(|&i| skeleton.distances[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
        let span = hi - lo;
        for &i in &label.member_indices {
            let phi = if span > 0.0 { (skeleton.distances[i] - lo) / span } else { 0.0 };
            if label.is_corner {
                w[i] += 1.0 - phi;
            } else {
                w[i] -= phi;
            }
        }
    }
    w
}

pub fn detect_corner_clusters(
    skeleton: &SharpSkeleton,
    weights: &[f64],
    t_corner: f64,
    merge_radius: f64,
    bbox_margin: f64,
) -> Result<Vec<CornerCluster>> {
    if weights.len() != skeleton.len() {
        return Err(Error::Argument(format!(
            "{} weights for a skeleton of {} points",
            weights.len(),
            skeleton.len()
        )));
    }
    let candidates: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > t_corner).collect();
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let cand_pos: Vec<Point> = candidates.iter().map(|&i| skeleton.positions[i]).collect();
    let tree = KdTree::new(&cand_pos);
    let mut sets = DisjointSet::new(candidates.len());
    for (a, p) in cand_pos.iter().enumerate() {
        for b in tree.radius_query(p, merge_radius) {
            sets.union(a, b);
        }
    }
    let groups = sets.groups();

    let mut clusters = Vec::with_capacity(groups.len());
    for group in groups {
        let seed_indices: Vec<usize> = group.iter().map(|&g| candidates[g]).collect();
        let mut bbox = Aabb::from_points(seed_indices.iter().map(|&i| &skeleton.positions[i]))
            .ok_or_else(|| Error::Internal("empty corner group".into()))?;
        bbox.min -= Vec3::repeat(bbox_margin);
        bbox.max += Vec3::repeat(bbox_margin);
        let member_indices: Vec<usize> =
            (0..skeleton.len()).filter(|&i| bbox.contains(&skeleton.positions[i])).collect();
        let center = crate::geom::centroid(member_indices.iter().map(|&i| &skeleton.positions[i]))
            .ok_or_else(|| Error::Internal("empty corner cluster".into()))?;
        clusters.push(CornerCluster {
            member_indices,
            seed_indices,
            bbox_min: bbox.min,
            bbox_max: bbox.max,
            center,
        });
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skeleton(positions: Vec<Point>, distances: Vec<f64>) -> SharpSkeleton {
        SharpSkeleton { parent_indices: (0..positions.len()).collect(), positions, distances }
    }

    #[test]
    fn empty_skeleton_is_reported() {
        let cloud = PointCloudField::new(vec![Point::origin(), Point::new(1.0, 0.0, 0.0)], vec![1.0, 1.0], 0.02)
            .unwrap();
        assert!(matches!(extract_skeleton(&cloud, 0.03), Err(Error::NoSharpFeatures)));
    }

    #[test]
    fn threshold_keeps_near_points_in_order() {
        let cloud = PointCloudField::new(
            vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(2.0, 0.0, 0.0)],
            vec![0.0, 0.02, 0.5],
            0.02,
        )
        .unwrap();
        let s = extract_skeleton(&cloud, 0.03).unwrap();
        assert_eq!(s.parent_indices, vec![0, 1]);
        assert_eq!(s.distances, vec![0.0, 0.02]);
    }

    #[test]
    fn collinear_neighborhood_is_curve() {
        let pts: Vec<Point> = (0..20).map(|i| Point::new(i as f64 * 0.01, 0.0, 0.0)).collect();
        let sk = skeleton(pts, vec![0.0; 20]);
        let labels = classify_neighborhoods(&sk, 0.1, 1.0, 0.3).unwrap();
        assert_eq!(labels.len(), 2);
        for l in &labels {
            assert!(l.sigma[1].abs() < 1e-12);
            assert!(!l.is_corner);
        }
    }

    #[test]
    fn plus_shape_is_corner() {
        // two perpendicular segments crossing at the origin
        let mut pts = Vec::new();
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            pts.push(Point::new(t, 0.0, 0.0));
            pts.push(Point::new(0.0, t, 0.0));
        }
        // brute-force covariance oracle: both in-plane axes carry the same variance
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
        let vxx = pts.iter().map(|p| (p.x - mx).powi(2)).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
        let vyy = pts.iter().map(|p| (p.y - my).powi(2)).sum::<f64>() / n;
        let vxy = pts.iter().map(|p| (p.x - mx) * (p.y - my)).sum::<f64>() / n;
        assert!(vxy.abs() < 1e-12);
        let expected_sigma2 = vxx.min(vyy) / (vxx + vyy);

        let sk = skeleton(pts, vec![0.0; 42]);
        let labels = classify_neighborhoods(&sk, 1.0 / 42.0, 10.0, 0.3).unwrap();
        assert_eq!(labels.len(), 1);
        assert!((labels[0].sigma[1] - expected_sigma2).abs() < 1e-12);
        assert!(labels[0].is_corner);
    }

    #[test]
    fn two_member_neighborhood_is_curve() {
        let sk = skeleton(vec![Point::origin(), Point::new(0.0, 1.0, 0.0)], vec![0.0, 0.0]);
        let labels = classify_neighborhoods(&sk, 1.0, 10.0, 0.0).unwrap();
        assert!(labels.iter().all(|l| !l.is_corner));
    }

    #[test]
    fn label_ratios_are_ordered_and_normalized() {
        let pts: Vec<Point> = (0..300)
            .map(|i| {
                let t = i as f64 * 0.13;
                Point::new(t.sin(), (1.7 * t).cos(), 0.3 * (0.7 * t).sin())
            })
            .collect();
        let sk = skeleton(pts, vec![0.0; 300]);
        for l in classify_neighborhoods(&sk, 0.2, 0.5, 0.3).unwrap() {
            assert!(l.sigma[0] <= l.sigma[1] && l.sigma[1] <= l.sigma[2]);
            assert!((l.sigma.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(l.is_corner, l.member_indices.len() >= 3 && l.sigma[1] > 0.3);
        }
    }

    fn label(members: Vec<usize>, is_corner: bool) -> NeighborhoodLabel {
        NeighborhoodLabel { center_index: members[0], member_indices: members, sigma: [0.0, 0.0, 1.0], is_corner }
    }

    #[test]
    fn weight_updates_follow_field_extremes() {
        let sk = skeleton(vec![Point::origin(); 3], vec![0.0, 0.01, 0.03]);
        let w = cornerness_weights(&sk, &[label(vec![0, 1, 2], true)]);
        assert_eq!(w[0], 1.0);
        assert_eq!(w[2], 0.0);
        assert!((w[1] - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
        let w = cornerness_weights(&sk, &[label(vec![0, 1, 2], false)]);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[2], -1.0);
    }

    #[test]
    fn constant_field_gives_phi_zero() {
        let sk = skeleton(vec![Point::origin(); 2], vec![0.02, 0.02]);
        assert_eq!(cornerness_weights(&sk, &[label(vec![0, 1], true)]), vec![1.0, 1.0]);
        assert_eq!(cornerness_weights(&sk, &[label(vec![0, 1], false)]), vec![0.0, 0.0]);
    }

    #[test]
    fn weights_are_order_independent() {
        let sk = skeleton(vec![Point::origin(); 5], vec![0.0, 0.01, 0.02, 0.005, 0.03]);
        let labels = vec![
            label(vec![0, 1, 2], true),
            label(vec![1, 2, 3, 4], false),
            label(vec![0, 4], true),
        ];
        let mut rev = labels.clone();
        rev.reverse();
        let a = cornerness_weights(&sk, &labels);
        let b = cornerness_weights(&sk, &rev);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn no_candidates_no_clusters() {
        let sk = skeleton(vec![Point::origin(); 3], vec![0.0; 3]);
        assert!(detect_corner_clusters(&sk, &[0.0, 1.0, 1.5], 1.5, 0.1, 0.0).unwrap().is_empty());
    }

    #[test]
    fn single_candidate_is_its_own_cluster() {
        let p = Point::new(0.3, 0.2, 0.1);
        let sk = skeleton(vec![Point::origin(), p, Point::new(1.0, 1.0, 1.0)], vec![0.0; 3]);
        let c = detect_corner_clusters(&sk, &[0.0, 2.0, 0.0], 1.5, 0.1, 0.0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].member_indices, vec![1]);
        assert_eq!(c[0].bbox_min, p);
        assert_eq!(c[0].bbox_max, p);
        assert_eq!(c[0].center, p);
    }

    #[test]
    fn bounding_box_expansion_is_superset_of_seeds() {
        let pts = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(0.1, 0.1, 0.0),
            Point::new(0.05, 0.05, 0.0),
            Point::new(0.5, 0.5, 0.0),
            Point::new(0.55, 0.5, 0.0),
        ];
        let sk = skeleton(pts, vec![0.0; 5]);
        let c = detect_corner_clusters(&sk, &[2.0, 2.0, 0.0, 2.0, 2.0], 1.5, 0.2, 0.0).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].member_indices, vec![0, 1, 2]);
        assert_eq!(c[0].seed_indices, vec![0, 1]);
        assert_eq!(c[1].member_indices, vec![3, 4]);
        for cl in &c {
            assert!(cl.seed_indices.iter().all(|s| cl.member_indices.contains(s)));
        }
    }
}
