use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::SharpSkeleton;
use crate::corners::CornerCluster;
use crate::error::{Error, Result};
use crate::geom::{project_to_segment, Point};

use super::polyline::Polyline;

/// Nodes closer than this are merged when the graph is assembled.
pub const MERGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    CornerCenter,
    PolylineInterior,
    Endpoint,
}

impl NodeKind {
    fn priority(self) -> u8 {
        match self {
            NodeKind::CornerCenter => 2,
            NodeKind::Endpoint => 1,
            NodeKind::PolylineInterior => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopologicalGraph {
    pub nodes: Vec<Point>,
    /// Undirected edges stored with the smaller index first.
    pub edges: Vec<(usize, usize)>,
    pub node_kind: Vec<NodeKind>,
}

impl TopologicalGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut nbrs = vec![Vec::new(); self.nodes.len()];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            nbrs[a].push((b, e));
            nbrs[b].push((a, e));
        }
        nbrs
    }

    fn add_node(&mut self, p: Point, kind: NodeKind) -> usize {
        if let Some(i) = self.nodes.iter().position(|q| (q - p).norm() <= MERGE_TOLERANCE) {
            if kind.priority() > self.node_kind[i].priority() {
                self.node_kind[i] = kind;
            }
            return i;
        }
        self.nodes.push(p);
        self.node_kind.push(kind);
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let e = (a.min(b), a.max(b));
        if !self.edges.contains(&e) {
            self.edges.push(e);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphProjection {
    pub edge_index: usize,
    pub foot_point: Point,
    /// Position of the foot along the edge, 0 at `edges[e].0` and 1 at `edges[e].1`.
    pub param: f64,
    pub distance: f64,
}

impl GraphProjection {
    /// `|d - ||p - foot|||` for a field value `d`.
    pub fn residual(&self, d: f64) -> f64 {
        (d - self.distance).abs()
    }
}

/// Builds the graph from refined polylines and corner centers.
///
/// Open polyline ends are wired to the nearest corner center within
/// `attach_radius`; ends with no corner in range stay dangling.
pub fn assemble_graph(polylines: &[Polyline], corner_clusters: &[CornerCluster], attach_radius: f64) -> TopologicalGraph {
    let mut g = TopologicalGraph::default();
    let corner_ids: Vec<usize> =
        corner_clusters.iter().map(|c| g.add_node(c.center, NodeKind::CornerCenter)).collect();
    for poly in polylines {
        let n = poly.nodes.len();
        let ids: Vec<usize> = poly
            .nodes
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let kind = if !poly.closed && (k == 0 || k + 1 == n) {
                    NodeKind::Endpoint
                } else {
                    NodeKind::PolylineInterior
                };
                g.add_node(*p, kind)
            })
            .collect();
        for l in 0..poly.segment_count() {
            g.add_edge(ids[l], ids[(l + 1) % n]);
        }
        if poly.closed || n == 0 {
            continue;
        }
        for &end in &[ids[0], ids[n - 1]] {
            let p = g.nodes[end];
            let nearest = corner_ids
                .iter()
                .map(|&c| (c, (g.nodes[c] - p).norm()))
                .filter(|&(_, d)| d <= attach_radius)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((c, _)) = nearest {
                g.add_edge(end, c);
            }
        }
    }
    g
}

fn project_onto_edges(point: &Point, nodes: &[Point], edges: &[(usize, usize)]) -> GraphProjection {
    let mut best = GraphProjection { edge_index: 0, foot_point: *point, param: 0.0, distance: f64::INFINITY };
    for (e, &(a, b)) in edges.iter().enumerate() {
        let (s, foot) = project_to_segment(point, &nodes[a], &nodes[b]);
        let d = (point - foot).norm();
        if d < best.distance {
            best = GraphProjection { edge_index: e, foot_point: foot, param: s, distance: d };
        }
    }
    best
}

/// Closest point on the graph; the lower edge index wins ties.
pub fn project_to_graph(point: &Point, graph: &TopologicalGraph) -> Result<GraphProjection> {
    if graph.edges.is_empty() {
        return Err(Error::Argument("graph has no edges".into()));
    }
    Ok(project_onto_edges(point, &graph.nodes, &graph.edges))
}

pub fn project_all(points: &[Point], nodes: &[Point], edges: &[(usize, usize)]) -> Vec<GraphProjection> {
    points.par_iter().map(|p| project_onto_edges(p, nodes, edges)).collect()
}

/// `Σ (d_i - dist(p_i, G))²` by direct summation.
pub fn graph_objective(graph: &TopologicalGraph, skeleton: &SharpSkeleton) -> f64 {
    if graph.edges.is_empty() {
        return 0.0;
    }
    project_all(&skeleton.positions, &graph.nodes, &graph.edges)
        .iter()
        .zip(&skeleton.distances)
        .map(|(pr, d)| (d - pr.distance).powi(2))
        .sum()
}

/// Nodes whose degree is not two.
pub fn reconcile_corners(graph: &TopologicalGraph) -> Vec<usize> {
    graph.degrees().iter().enumerate().filter(|(_, &d)| d != 2).map(|(i, _)| i).collect()
}
