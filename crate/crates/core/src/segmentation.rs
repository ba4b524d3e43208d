//! Curve segmentation: drop corner clusters from the skeleton, connect what
//! remains within a radius, and keep the connected components.

use crate::cloud::SharpSkeleton;
use crate::corners::CornerCluster;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::spatial::KdTree;

/// Components smaller than this are treated as noise.
pub const MIN_COMPONENT: usize = 3;

#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    /// All sets, each sorted, ordered by their smallest element.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let root = self.find(x);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(x);
        }
        groups
    }
}

/// Undirected graph as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityGraph {
    pub adjacency: Vec<Vec<usize>>,
}

impl ProximityGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveCluster {
    pub id: usize,
    pub member_indices: Vec<usize>,
    pub positions: Vec<Point>,
    pub distances: Vec<f64>,
}

impl CurveCluster {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub clusters: Vec<CurveCluster>,
    /// Skeleton indices of points in components below [`MIN_COMPONENT`].
    pub discarded: Vec<usize>,
}

pub fn remove_corner_points(skeleton: &SharpSkeleton, clusters: &[CornerCluster]) -> Result<Vec<usize>> {
    let mut removed = vec![false; skeleton.len()];
    for c in clusters {
        for &i in &c.member_indices {
            removed[i] = true;
        }
    }
    let remaining: Vec<usize> = (0..skeleton.len()).filter(|&i| !removed[i]).collect();
    if remaining.is_empty() {
        return Err(Error::NoCurves("corner clusters cover the whole skeleton".into()));
    }
    Ok(remaining)
}

pub fn build_proximity_graph(positions: &[Point], connect_radius: f64) -> Result<ProximityGraph> {
    if !(connect_radius > 0.0) {
        return Err(Error::Argument(format!("connect_radius must be positive, got {connect_radius}")));
    }
    let tree = KdTree::new(positions);
    let adjacency = positions
        .iter()
        .enumerate()
        .map(|(i, p)| tree.radius_query(p, connect_radius).into_iter().filter(|&j| j != i).collect())
        .collect();
    Ok(ProximityGraph { adjacency })
}

/// Vertex sets of the connected components, ordered by smallest member.
pub fn connected_components(graph: &ProximityGraph) -> Vec<Vec<usize>> {
    let mut sets = DisjointSet::new(graph.len());
    for (i, nbrs) in graph.adjacency.iter().enumerate() {
        for &j in nbrs {
            sets.union(i, j);
        }
    }
    sets.groups()
}

/// Splits the non-corner part of the skeleton into curve clusters.
pub fn segment_curves(
    skeleton: &SharpSkeleton,
    remaining: &[usize],
    connect_radius: f64,
) -> Result<Segmentation> {
    let positions: Vec<Point> = remaining.iter().map(|&i| skeleton.positions[i]).collect();
    let graph = build_proximity_graph(&positions, connect_radius)?;
    let mut clusters = Vec::new();
    let mut discarded = Vec::new();
    for component in connected_components(&graph) {
        let members: Vec<usize> = component.iter().map(|&k| remaining[k]).collect();
        if members.len() < MIN_COMPONENT {
            discarded.extend(members);
            continue;
        }
        clusters.push(CurveCluster {
            id: clusters.len(),
            positions: members.iter().map(|&i| skeleton.positions[i]).collect(),
            distances: members.iter().map(|&i| skeleton.distances[i]).collect(),
            member_indices: members,
        });
    }
    discarded.sort_unstable();
    if clusters.is_empty() {
        return Err(Error::NoCurves("no component has enough points".into()));
    }
    Ok(Segmentation { clusters, discarded })
}
