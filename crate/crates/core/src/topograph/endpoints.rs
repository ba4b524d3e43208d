use crate::error::{Error, Result};
use crate::pca::Pca;
use crate::segmentation::CurveCluster;
use crate::spatial::KdTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoints {
    /// Cluster indices of the two curve ends.
    Open(usize, usize),
    Closed,
}

/// Signed linear-embedding score of every cluster point.
///
/// For a query point, its neighbors within `local_radius` are projected onto
/// their principal axis and the score is the mean sign of the offsets from
/// the query. Interior points score near zero, curve ends near ±1. The query
/// itself counts in the mean with a zero sign.
pub fn endpoint_scores(cluster: &CurveCluster, local_radius: f64) -> Result<Vec<f64>> {
    let whole = Pca::from_points(&cluster.positions)
        .ok_or_else(|| Error::Validation("empty cluster".into()))?;
    if whole.variance_ratios().is_none() {
        return Err(Error::Validation(format!("cluster {} has no spread", cluster.id)));
    }
    let tree = KdTree::new(&cluster.positions);
    Ok(cluster
        .positions
        .iter()
        .map(|q| {
            let local = tree.radius_query(q, local_radius);
            let Some(pca) = Pca::from_points(local.iter().map(|&i| &cluster.positions[i])) else {
                return 0.0;
            };
            if pca.variance_ratios().is_none() {
                return 0.0;
            }
            let axis = pca.principal_axis();
            let tau_q = q.coords.dot(&axis);
            let sum: f64 = local
                .iter()
                .map(|&i| {
                    let t = cluster.positions[i].coords.dot(&axis) - tau_q;
                    if t > 0.0 {
                        1.0
                    } else if t < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .sum();
            sum / local.len() as f64
        })
        .collect())
}

/// Finds the two curve ends of a cluster, or reports it as closed when no
/// point scores above `v_open_threshold` in magnitude.
///
/// The first end is the highest-|score| point; the second is the highest
/// scorer farther than `local_radius` from it, falling back to the point
/// farthest from the first end.
pub fn detect_endpoints(cluster: &CurveCluster, local_radius: f64, v_open_threshold: f64) -> Result<Endpoints> {
    if cluster.len() < 3 {
        return Err(Error::Argument(format!("cluster {} has fewer than 3 points", cluster.id)));
    }
    let scores = endpoint_scores(cluster, local_radius)?;
    let argmax = |filter: &dyn Fn(usize) -> bool| -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in (0..scores.len()).filter(|&i| filter(i)) {
            if best.is_none_or(|b| scores[i].abs() > scores[b].abs()) {
                best = Some(i);
            }
        }
        best
    };
    let first = argmax(&|_| true).expect("non-empty cluster");
    if scores[first].abs() < v_open_threshold {
        return Ok(Endpoints::Closed);
    }
    let anchor = cluster.positions[first];
    let second = argmax(&|i| (cluster.positions[i] - anchor).norm() > local_radius)
        .filter(|&i| scores[i].abs() >= v_open_threshold)
        .unwrap_or_else(|| {
            let mut far = first;
            let mut far_d = -1.0;
            for (i, p) in cluster.positions.iter().enumerate() {
                let d = (p - anchor).norm();
                if d > far_d {
                    far_d = d;
                    far = i;
                }
            }
            far
        });
    if second == first {
        return Err(Error::Validation(format!("cluster {} has a single distinct position", cluster.id)));
    }
    Ok(Endpoints::Open(first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use std::f64::consts::PI;

    fn cluster(positions: Vec<Point>) -> CurveCluster {
        let n = positions.len();
        CurveCluster { id: 0, member_indices: (0..n).collect(), positions, distances: vec![0.0; n] }
    }

    #[test]
    fn five_point_line_scores() {
        let c = cluster((0..5).map(|i| Point::new(i as f64, 0.0, 0.0)).collect());
        let v = endpoint_scores(&c, 10.0).unwrap();
        // the principal axis sign is arbitrary; the magnitudes and antisymmetry are not
        assert!((v[0].abs() - 0.8).abs() < 1e-15);
        assert!((v[4] + v[0]).abs() < 1e-15);
        assert_eq!(v[2], 0.0);
        assert_eq!(detect_endpoints(&c, 10.0, 0.6).unwrap(), Endpoints::Open(0, 4));
    }

    #[test]
    fn circle_is_closed() {
        let c = cluster(
            (0..64)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / 64.0;
                    Point::new(0.3 * a.cos(), 0.3 * a.sin(), 0.0)
                })
                .collect(),
        );
        // brute force: every local set is symmetric about its query point
        let v = endpoint_scores(&c, 0.08).unwrap();
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max < 0.6, "max |V| = {max}");
        assert_eq!(detect_endpoints(&c, 0.08, 0.6).unwrap(), Endpoints::Closed);
    }

    #[test]
    fn open_arc_finds_its_tips() {
        let c = cluster(
            (0..=90)
                .map(|i| {
                    let a = 1.5 * PI * i as f64 / 90.0;
                    Point::new(0.3 * a.cos(), 0.3 * a.sin(), 0.0)
                })
                .collect(),
        );
        let Endpoints::Open(a, b) = detect_endpoints(&c, 0.08, 0.6).unwrap() else {
            panic!("arc reported closed");
        };
        let mut ends = [a, b];
        ends.sort_unstable();
        assert_eq!(ends, [0, 90]);
    }

    #[test]
    fn coincident_cluster_is_rejected() {
        let c = cluster(vec![Point::origin(); 4]);
        assert!(detect_endpoints(&c, 1.0, 0.6).is_err());
    }
}
