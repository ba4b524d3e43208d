//! Node position optimization.
//!
//! Minimizes `Σ (d_i - ||p_i - π(p_i)||)²` over node positions, where `π`
//! projects onto the nearest graph edge. Each outer iteration freezes the
//! edge assignment and barycentric foot of every skeleton point and replaces
//! the norm residual by a pull of the foot toward `p_i - d_i u_i`, with `u_i`
//! the unit vector from foot to point. That surrogate is quadratic in the
//! nodes, shares its gradient with the true objective at the current state,
//! and decouples per coordinate into a sparse SPD system on the graph. Steps
//! that do not lower the true objective are halved.

use crate::cloud::SharpSkeleton;
use crate::geom::{Point, Vec3};

use super::graph::{project_all, GraphProjection, TopologicalGraph};

const DAMPING: f64 = 1e-4;
const MAX_HALVINGS: usize = 12;

#[derive(Debug, Clone)]
pub struct NodeOptimization {
    pub graph: TopologicalGraph,
    /// Objective at the start and after every accepted iteration.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn objective(proj: &[GraphProjection], distances: &[f64]) -> f64 {
    proj.iter().zip(distances).map(|(p, d)| (d - p.distance).powi(2)).sum()
}

/// Sparse symmetric system with the graph's sparsity pattern.
struct GraphSystem<'a> {
    diag: Vec<f64>,
    off: Vec<f64>,
    edges: &'a [(usize, usize)],
}

impl GraphSystem<'_> {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, (d, xi)) in y.iter_mut().zip(self.diag.iter().zip(x)) {
            *yi = d * xi;
        }
        for (&(a, b), &v) in self.edges.iter().zip(&self.off) {
            y[a] += v * x[b];
            y[b] += v * x[a];
        }
    }

    /// Jacobi-preconditioned conjugate gradients.
    fn solve(&self, rhs: &[f64], x0: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = x0.to_vec();
        let mut ax = vec![0.0; n];
        self.apply(&x, &mut ax);
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let mut ap = vec![0.0; n];
        for _ in 0..(4 * n + 20) {
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= 1e-13 * rhs_norm {
                break;
            }
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        x
    }
}

/// Solves the frozen-assignment surrogate and returns the proposed nodes.
fn surrogate_step(graph: &TopologicalGraph, skeleton: &SharpSkeleton, proj: &[GraphProjection]) -> Vec<Point> {
    let n = graph.nodes.len();
    let mut diag = vec![DAMPING; n];
    let mut off = vec![0.0; graph.edges.len()];
    let mut rhs = vec![Vec3::zeros(); n];
    for (k, node) in graph.nodes.iter().enumerate() {
        rhs[k] = node.coords * DAMPING;
    }
    for ((pr, p), &d) in proj.iter().zip(&skeleton.positions).zip(&skeleton.distances) {
        let (a, b) = graph.edges[pr.edge_index];
        let (wa, wb) = (1.0 - pr.param, pr.param);
        let v = p - pr.foot_point;
        let len = v.norm();
        let target = if len > 1e-12 { p - v * (d / len) } else { pr.foot_point };
        diag[a] += wa * wa;
        diag[b] += wb * wb;
        off[pr.edge_index] += wa * wb;
        rhs[a] += target.coords * wa;
        rhs[b] += target.coords * wb;
    }
    let system = GraphSystem { diag, off, edges: &graph.edges };
    let mut out = graph.nodes.clone();
    for k in 0..3 {
        let b: Vec<f64> = rhs.iter().map(|v| v[k]).collect();
        let x0: Vec<f64> = graph.nodes.iter().map(|p| p[k]).collect();
        let x = system.solve(&b, &x0);
        for (node, xi) in out.iter_mut().zip(x) {
            node[k] = xi;
        }
    }
    out
}

pub fn optimize_node_positions(
    graph: &TopologicalGraph,
    skeleton: &SharpSkeleton,
    iters: usize,
    step_tol: f64,
) -> NodeOptimization {
    let mut current = graph.clone();
    if current.edges.is_empty() || skeleton.is_empty() {
        return NodeOptimization { graph: current, objective_history: vec![0.0], iterations: 0, converged: true };
    }
    let mut proj = project_all(&skeleton.positions, &current.nodes, &current.edges);
    let mut obj = objective(&proj, &skeleton.distances);
    let mut history = vec![obj];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < iters {
        iterations += 1;
        let proposal = surrogate_step(&current, skeleton, &proj);
        if proposal.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            log::warn!("node optimization produced non-finite positions; stopping");
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<Point> = current
                .nodes
                .iter()
                .zip(&proposal)
                .map(|(old, new)| old + (new - old) * step)
                .collect();
            let trial_proj = project_all(&skeleton.positions, &trial, &current.edges);
            let trial_obj = objective(&trial_proj, &skeleton.distances);
            if trial_obj <= obj {
                accepted = Some((trial, trial_proj, trial_obj));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, trial_proj, trial_obj)) = accepted else {
            converged = true;
            break;
        };
        let displacement = current
            .nodes
            .iter()
            .zip(&trial)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        current.nodes = trial;
        proj = trial_proj;
        obj = trial_obj;
        history.push(obj);
        if displacement < step_tol {
            converged = true;
            break;
        }
    }
    NodeOptimization { graph: current, objective_history: history, iterations, converged }
}
