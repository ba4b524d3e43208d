use log::warn;

use crate::cloud::SharpSkeleton;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::topograph::{project_all, TopologicalGraph};

/// A corner-to-corner chain of graph edges, or a corner-free cycle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurvePath {
    /// Nodes in walking order. A closed path lists each cycle node once.
    pub node_indices: Vec<usize>,
    /// Graph edges in walking order; edge `k` joins node `k` and node `k + 1` (cyclically).
    pub edge_indices: Vec<usize>,
    pub closed: bool,
    /// Skeleton indices whose nearest graph edge lies on this path, sorted by parameter.
    pub assigned_points: Vec<usize>,
    pub params_u: Vec<f64>,
    /// Cumulative arc length at each node. Closed paths carry one extra entry,
    /// the full loop length.
    pub knots_t: Vec<f64>,
}

impl CurvePath {
    pub fn length(&self) -> f64 {
        self.knots_t.last().copied().unwrap_or(0.0)
    }

    pub fn first_node(&self) -> usize {
        self.node_indices[0]
    }

    pub fn last_node(&self) -> usize {
        if self.closed {
            self.node_indices[0]
        } else {
            *self.node_indices.last().expect("path has nodes")
        }
    }
}

/// Splits the edge set into chains between `corners`. Every edge ends up in
/// exactly one path.
pub fn partition_into_paths(graph: &TopologicalGraph, corners: &[usize]) -> Result<Vec<CurvePath>> {
    let n = graph.nodes.len();
    let mut is_corner = vec![false; n];
    for &c in corners {
        if c >= n {
            return Err(Error::Argument(format!("corner index {c} out of range")));
        }
        is_corner[c] = true;
    }
    let nbrs = graph.neighbors();
    let mut used = vec![false; graph.edges.len()];
    let mut paths = Vec::new();

    let walk = |start: usize, first_edge: usize, used: &mut Vec<bool>| -> Result<CurvePath> {
        let mut path = CurvePath { node_indices: vec![start], ..Default::default() };
        let (mut cur, mut edge) = (start, first_edge);
        loop {
            used[edge] = true;
            path.edge_indices.push(edge);
            let (a, b) = graph.edges[edge];
            let next = if a == cur { b } else { a };
            if next == start && !is_corner[start] {
                path.closed = true;
                return Ok(path);
            }
            path.node_indices.push(next);
            if is_corner[next] {
                return Ok(path);
            }
            if nbrs[next].len() != 2 {
                return Err(Error::Internal(format!("node {next} has degree {} but is not a corner", nbrs[next].len())));
            }
            let onward = nbrs[next].iter().find(|&&(_, e)| e != edge).map(|&(_, e)| e);
            match onward {
                Some(e) if !used[e] => {
                    cur = next;
                    edge = e;
                }
                _ => return Err(Error::Internal(format!("ambiguous chain through node {next}"))),
            }
        }
    };

    for c in 0..n {
        if !is_corner[c] {
            continue;
        }
        for &(_, e) in &nbrs[c] {
            if !used[e] {
                paths.push(walk(c, e, &mut used)?);
            }
        }
    }
    for (start, edges) in nbrs.iter().enumerate() {
        for &(_, e) in edges {
            if !used[e] {
                paths.push(walk(start, e, &mut used)?);
            }
        }
    }
    Ok(paths)
}

fn cumulative_lengths(path: &CurvePath, nodes: &[Point]) -> Vec<f64> {
    let k = path.node_indices.len();
    let steps = if path.closed { k } else { k - 1 };
    let mut t = Vec::with_capacity(steps + 1);
    t.push(0.0);
    for j in 0..steps {
        let a = nodes[path.node_indices[j]];
        let b = nodes[path.node_indices[(j + 1) % k]];
        t.push(t[j] + (b - a).norm());
    }
    t
}

/// Fills knots and point parameters for every path with one shared projection
/// of the skeleton onto the graph.
pub fn parameterize_paths(paths: &[CurvePath], graph: &TopologicalGraph, skeleton: &SharpSkeleton) -> Vec<CurvePath> {
    let mut owner = vec![(usize::MAX, 0usize); graph.edges.len()];
    for (pi, path) in paths.iter().enumerate() {
        for (k, &e) in path.edge_indices.iter().enumerate() {
            owner[e] = (pi, k);
        }
    }
    let mut out: Vec<CurvePath> = paths
        .iter()
        .map(|p| CurvePath {
            knots_t: cumulative_lengths(p, &graph.nodes),
            assigned_points: Vec::new(),
            params_u: Vec::new(),
            ..p.clone()
        })
        .collect();
    if graph.edges.is_empty() {
        return out;
    }
    let projections = project_all(&skeleton.positions, &graph.nodes, &graph.edges);
    let mut assigned: Vec<Vec<(f64, usize)>> = vec![Vec::new(); paths.len()];
    for (i, pr) in projections.iter().enumerate() {
        let (pi, k) = owner[pr.edge_index];
        if pi == usize::MAX {
            continue;
        }
        let path = &out[pi];
        let from = path.node_indices[k];
        let span = path.knots_t[k + 1] - path.knots_t[k];
        let s = if graph.edges[pr.edge_index].0 == from { pr.param } else { 1.0 - pr.param };
        assigned[pi].push((path.knots_t[k] + s * span, i));
    }
    for (path, mut pts) in out.iter_mut().zip(assigned) {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if pts.is_empty() {
            warn!("path starting at node {} has no assigned points", path.node_indices[0]);
        }
        path.params_u = pts.iter().map(|p| p.0).collect();
        path.assigned_points = pts.iter().map(|p| p.1).collect();
    }
    out
}

/// Single-path form of [`parameterize_paths`]. Points are assigned against
/// the whole graph, so only those nearest to this path are kept.
pub fn parameterize_path(path: &CurvePath, graph: &TopologicalGraph, skeleton: &SharpSkeleton) -> CurvePath {
    parameterize_paths(std::slice::from_ref(path), graph, skeleton).remove(0)
}
