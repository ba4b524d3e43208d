//! Static k-d tree over 3D points.
//!
//! Built once, then queried from any number of threads. Radius queries are
//! inclusive and return indices sorted ascending so that downstream stages
//! stay deterministic.

use crate::geom::Point;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(points: &[Point]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the widest extent
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for k in 0..3 {
                lo[k] = lo[k].min(self.points[i][k]);
                hi[k] = hi[k].max(self.points[i][k]);
            }
        }
        let dim = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[dim] - lo[dim] <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| points[a][dim].total_cmp(&points[b][dim]));
        let value = self.points[self.order[mid]][dim];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { dim, value, left, right };
        id
    }

    /// Indices of all points with `|p - center| <= radius`, sorted ascending.
    pub fn radius_query(&self, center: &Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() || !(radius >= 0.0) {
            return out;
        }
        let r2 = radius * radius;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        if (self.points[i] - center).norm_squared() <= r2 {
                            out.push(i);
                        }
                    }
                }
                Node::Split { dim, value, left, right } => {
                    let delta = center[dim] - value;
                    if delta <= radius {
                        stack.push(left);
                    }
                    if delta >= -radius {
                        stack.push(right);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest point to `query` as `(index, distance)`; ties go to the lower index.
    pub fn nearest(&self, query: &Point) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, query, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn nearest_rec(&self, id: usize, q: &Point, best: &mut (usize, f64)) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = (self.points[i] - q).norm_squared();
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let delta = q[dim] - value;
                let (near, far) = if delta <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, q, best);
                if delta * delta <= best.1 {
                    self.nearest_rec(far, q, best);
                }
            }
        }
    }

    /// Distance from point `i` of the tree to its nearest other point.
    pub fn nearest_other_distance(&self, i: usize) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let q = self.points[i];
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_excluding(0, &q, i, &mut best);
        Some(best.1.sqrt())
    }

    fn nearest_excluding(&self, id: usize, q: &Point, skip: usize, best: &mut (usize, f64)) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i == skip {
                        continue;
                    }
                    let d2 = (self.points[i] - q).norm_squared();
                    if d2 < best.1 {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let delta = q[dim] - value;
                let (near, far) = if delta <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_excluding(near, q, skip, best);
                if delta * delta <= best.1 {
                    self.nearest_excluding(far, q, skip, best);
                }
            }
        }
    }
}

/// Indices of `positions` within `radius` of `center` (inclusive), sorted.
pub fn radius_query(positions: &[Point], center: &Point, radius: f64) -> Vec<usize> {
    KdTree::new(positions).radius_query(center, radius)
}
