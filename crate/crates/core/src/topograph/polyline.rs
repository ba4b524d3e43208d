use crate::error::{Error, Result};
use crate::geom::{segment_distance, Point};
use crate::sampling::farthest_point_sampling;
use crate::segmentation::CurveCluster;

/// Minimum separation between consecutive polyline nodes.
pub const NODE_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub nodes: Vec<Point>,
    pub closed: bool,
    pub source_cluster: usize,
}

impl Polyline {
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.nodes.len()
        } else {
            self.nodes.len().saturating_sub(1)
        }
    }

    pub fn segment(&self, l: usize) -> (&Point, &Point) {
        (&self.nodes[l], &self.nodes[(l + 1) % self.nodes.len()])
    }
}

#[derive(Debug, Clone)]
pub struct Subdivision {
    pub polyline: Polyline,
    /// Largest point residual at the start of every round, final state last.
    pub max_residuals: Vec<f64>,
    pub hit_max_depth: bool,
}

pub fn init_open_polyline(cluster: &CurveCluster, first: usize, second: usize) -> Polyline {
    Polyline {
        nodes: vec![cluster.positions[first], cluster.positions[second]],
        closed: false,
        source_cluster: cluster.id,
    }
}

/// Triangle through three farthest-point samples of the cluster.
pub fn init_closed_polyline(cluster: &CurveCluster) -> Result<Polyline> {
    let picks = farthest_point_sampling(&cluster.positions, 3)?;
    Ok(Polyline {
        nodes: picks.iter().map(|&i| cluster.positions[i]).collect(),
        closed: true,
        source_cluster: cluster.id,
    })
}

/// `min_l |d - dist(p, segment l)|` and the segment realizing it.
pub fn point_residual(p: &Point, d: f64, polyline: &Polyline) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for l in 0..polyline.segment_count() {
        let (a, b) = polyline.segment(l);
        let r = (d - segment_distance(p, a, b)).abs();
        if r < best.0 {
            best = (r, l);
        }
    }
    best
}

/// Worst point of the cluster: `(point index, residual, segment)`.
fn worst_point(polyline: &Polyline, cluster: &CurveCluster) -> (usize, f64, usize) {
    let mut worst = (0, f64::NEG_INFINITY, 0);
    for (i, (p, &d)) in cluster.positions.iter().zip(&cluster.distances).enumerate() {
        let (r, l) = point_residual(p, d, polyline);
        if r > worst.1 {
            worst = (i, r, l);
        }
    }
    worst
}

/// Refines a polyline by inserting the worst-fitting cluster point into the
/// segment it is matched to, until every residual is within `t_split`.
///
/// An insertion that would raise the worst residual is rejected and ends the
/// refinement, so `max_residuals` never increases.
pub fn subdivide_polyline(
    polyline: &Polyline,
    cluster: &CurveCluster,
    t_split: f64,
    max_depth: usize,
) -> Result<Subdivision> {
    let min_nodes = if polyline.closed { 3 } else { 2 };
    if polyline.nodes.len() < min_nodes {
        return Err(Error::Argument(format!(
            "polyline needs at least {min_nodes} nodes, has {}",
            polyline.nodes.len()
        )));
    }
    if cluster.is_empty() {
        return Err(Error::Argument("empty cluster".into()));
    }
    let mut current = polyline.clone();
    let mut worst = worst_point(&current, cluster);
    let mut max_residuals = vec![worst.1];
    let mut depth = 0;
    let mut hit_max_depth = false;
    while worst.1 > t_split {
        if depth == max_depth {
            hit_max_depth = true;
            break;
        }
        let (i, _, l) = worst;
        let p = cluster.positions[i];
        let (a, b) = current.segment(l);
        if (p - a).norm() <= NODE_SEPARATION || (p - b).norm() <= NODE_SEPARATION {
            break;
        }
        let mut next = current.clone();
        next.nodes.insert(l + 1, p);
        let next_worst = worst_point(&next, cluster);
        if next_worst.1 > worst.1 {
            log::debug!("cluster {}: insertion would raise residual, stopping", cluster.id);
            break;
        }
        current = next;
        worst = next_worst;
        max_residuals.push(worst.1);
        depth += 1;
    }
    if hit_max_depth {
        log::warn!("cluster {}: subdivision stopped at depth {max_depth}", cluster.id);
    }
    Ok(Subdivision { polyline: current, max_residuals, hit_max_depth })
}
