//! End-to-end extraction: skeleton, corners, curve clusters, topological
//! graph, and fitted splines.

use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{PointCloudField, SharpSkeleton};
use crate::corners::{classify_neighborhoods, cornerness_weights, detect_corner_clusters, extract_skeleton, CornerCluster};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::segmentation::{remove_corner_points, segment_curves, CurveCluster};
use crate::splines::{
    fit_spline, optimize_control_points, parameterize_paths, partition_into_paths, BSplineCurve, PathSamples,
};
use crate::topograph::{
    assemble_graph, detect_endpoints, init_closed_polyline, init_open_polyline, optimize_node_positions,
    reconcile_corners, subdivide_polyline, Endpoints, NodeKind, Polyline, TopologicalGraph,
};
use crate::wireframe::Wireframe;

/// Fewest input points the pipeline accepts.
pub const MIN_PIPELINE_POINTS: usize = 4;

/// Tunable parameters. Lengths are multiples of the sampling distance `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Sampling distance; taken from the cloud when unset.
    pub r: Option<f64>,
    pub t_dist_mult: f64,
    pub r_corner_mult: f64,
    pub t_variance: f64,
    pub t_corner: f64,
    pub fps_ratio: f64,
    /// Single-linkage radius for corner candidates, as a multiple of `r`.
    pub merge_radius_mult: f64,
    /// Corner boxes grow by this many `r` on every side.
    pub corner_margin_mult: f64,
    pub connect_radius_mult: f64,
    /// Neighborhood radius for endpoint scores, as a multiple of `r`.
    pub endpoint_radius_mult: f64,
    pub v_open_threshold: f64,
    pub t_split_mult: f64,
    pub max_depth: usize,
    /// Corner attachment radius as a multiple of the corner radius.
    pub attach_radius_corner_mult: f64,
    pub node_iters: usize,
    /// Node optimization stops once no node moves more than this times `r`.
    pub node_step_tol_mult: f64,
    pub spline_degree: usize,
    pub spline_iters: usize,
    pub spline_step_tol_mult: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            r: None,
            t_dist_mult: 1.5,
            r_corner_mult: 4.0,
            t_variance: 0.3,
            t_corner: 1.5,
            fps_ratio: 0.5,
            merge_radius_mult: 4.0,
            corner_margin_mult: 1.5,
            connect_radius_mult: 1.5,
            endpoint_radius_mult: 4.0,
            v_open_threshold: 0.6,
            t_split_mult: 4.0,
            max_depth: 24,
            attach_radius_corner_mult: 3.0,
            node_iters: 50,
            node_step_tol_mult: 1e-3,
            spline_degree: 3,
            spline_iters: 50,
            spline_step_tol_mult: 1e-4,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_dist_mult", self.t_dist_mult),
            ("r_corner_mult", self.r_corner_mult),
            ("merge_radius_mult", self.merge_radius_mult),
            ("connect_radius_mult", self.connect_radius_mult),
            ("endpoint_radius_mult", self.endpoint_radius_mult),
            ("t_split_mult", self.t_split_mult),
            ("attach_radius_corner_mult", self.attach_radius_corner_mult),
            ("node_step_tol_mult", self.node_step_tol_mult),
            ("spline_step_tol_mult", self.spline_step_tol_mult),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Argument(format!("r must be positive, got {r}")));
            }
        }
        if !(self.corner_margin_mult >= 0.0 && self.corner_margin_mult.is_finite()) {
            return Err(Error::Argument(format!(
                "corner_margin_mult must be non-negative, got {}",
                self.corner_margin_mult
            )));
        }
        if !(self.fps_ratio > 0.0 && self.fps_ratio <= 1.0) {
            return Err(Error::Argument(format!("fps_ratio must lie in (0, 1], got {}", self.fps_ratio)));
        }
        if !(1..=3).contains(&self.spline_degree) {
            return Err(Error::Argument(format!("spline_degree must be 1, 2 or 3, got {}", self.spline_degree)));
        }
        if !(self.t_variance.is_finite() && self.t_corner.is_finite() && self.v_open_threshold.is_finite()) {
            return Err(Error::Argument("thresholds must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub points: usize,
    pub skeleton: usize,
    pub corner_clusters: usize,
    /// Skeleton points removed as members of some corner cluster.
    pub corner_points: usize,
    pub curve_clusters: usize,
    pub curve_points: usize,
    /// Points in components too small to be curves.
    pub discarded_points: usize,
    pub open_clusters: usize,
    pub closed_clusters: usize,
    /// Clusters with no spread, left out of the graph.
    pub skipped_clusters: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub paths: usize,
    /// Paths with no assigned points or zero length.
    pub dropped_paths: usize,
    pub curves: usize,
    pub corners: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageFlags {
    pub max_depth_hits: usize,
    pub node_optimization_converged: bool,
    pub degraded_curves: usize,
    pub isolated_corner_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub r: f64,
    pub config: PipelineConfig,
    pub timings: Vec<StageTiming>,
    pub counts: StageCounts,
    pub flags: StageFlags,
}

/// Objective traces kept for inspection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub subdivision_residuals: Vec<Vec<f64>>,
    pub node_objective_history: Vec<f64>,
    pub spline_objective_histories: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub wireframe: Wireframe,
    pub manifest: RunManifest,
    pub skeleton: SharpSkeleton,
    pub corner_clusters: Vec<CornerCluster>,
    pub curve_clusters: Vec<CurveCluster>,
    pub graph: TopologicalGraph,
    /// Per output curve, whether its fit or optimization was degraded.
    pub degraded: Vec<bool>,
    pub diagnostics: Diagnostics,
}

struct Timer {
    start: Instant,
    timings: Vec<StageTiming>,
}

impl Timer {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming { stage: stage.into(), millis: (now - self.start).as_secs_f64() * 1e3 });
        self.start = now;
    }
}

struct ClusterPolyline {
    polyline: Option<Polyline>,
    closed: bool,
    residuals: Vec<f64>,
    hit_max_depth: bool,
}

fn trace_cluster(cluster: &CurveCluster, cfg: &PipelineConfig, r: f64) -> Result<ClusterPolyline> {
    let endpoints = match detect_endpoints(cluster, cfg.endpoint_radius_mult * r, cfg.v_open_threshold) {
        Ok(e) => e,
        Err(e) => {
            warn!("skipping cluster {}: {e}", cluster.id);
            return Ok(ClusterPolyline { polyline: None, closed: false, residuals: vec![], hit_max_depth: false });
        }
    };
    let init = match endpoints {
        Endpoints::Open(a, b) => init_open_polyline(cluster, a, b),
        Endpoints::Closed => init_closed_polyline(cluster)?,
    };
    let sub = subdivide_polyline(&init, cluster, cfg.t_split_mult * r, cfg.max_depth)?;
    Ok(ClusterPolyline {
        closed: init.closed,
        polyline: Some(sub.polyline),
        residuals: sub.max_residuals,
        hit_max_depth: sub.hit_max_depth,
    })
}

/// Runs the whole extraction on a cloud.
pub fn extract_wireframe(cloud: &PointCloudField, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    if cloud.len() < MIN_PIPELINE_POINTS {
        return Err(Error::TooSmall { found: cloud.len(), required: MIN_PIPELINE_POINTS });
    }
    let r = config.r.unwrap_or(cloud.sampling_distance());
    let r_corner = config.r_corner_mult * r;
    let mut timer = Timer { start: Instant::now(), timings: Vec::new() };
    let mut counts = StageCounts { points: cloud.len(), ..Default::default() };
    let mut flags = StageFlags::default();
    let mut diagnostics = Diagnostics::default();

    let skeleton = extract_skeleton(cloud, config.t_dist_mult * r)?;
    counts.skeleton = skeleton.len();
    timer.lap("skeleton");

    let labels = classify_neighborhoods(&skeleton, config.fps_ratio, r_corner, config.t_variance)?;
    let weights = cornerness_weights(&skeleton, &labels);
    let corner_clusters = detect_corner_clusters(
        &skeleton,
        &weights,
        config.t_corner,
        config.merge_radius_mult * r,
        config.corner_margin_mult * r,
    )?;
    counts.corner_clusters = corner_clusters.len();
    debug!(
        "{} of {} neighborhoods look like corners; {} corner clusters",
        labels.iter().filter(|l| l.is_corner).count(),
        labels.len(),
        corner_clusters.len()
    );
    timer.lap("corners");

    let remaining = remove_corner_points(&skeleton, &corner_clusters)?;
    counts.corner_points = skeleton.len() - remaining.len();
    let segmentation = segment_curves(&skeleton, &remaining, config.connect_radius_mult * r)?;
    counts.curve_clusters = segmentation.clusters.len();
    counts.curve_points = segmentation.clusters.iter().map(|c| c.len()).sum();
    counts.discarded_points = segmentation.discarded.len();
    timer.lap("segmentation");

    let traced: Vec<ClusterPolyline> = segmentation
        .clusters
        .par_iter()
        .map(|c| trace_cluster(c, config, r))
        .collect::<Result<_>>()?;
    let mut polylines = Vec::new();
    for t in traced {
        match t.polyline {
            Some(p) => {
                if t.closed {
                    counts.closed_clusters += 1;
                } else {
                    counts.open_clusters += 1;
                }
                flags.max_depth_hits += t.hit_max_depth as usize;
                diagnostics.subdivision_residuals.push(t.residuals);
                polylines.push(p);
            }
            None => counts.skipped_clusters += 1,
        }
    }
    if polylines.is_empty() {
        return Err(Error::NoCurves("no curve cluster could be traced".into()));
    }
    let graph = assemble_graph(&polylines, &corner_clusters, config.attach_radius_corner_mult * r_corner);
    timer.lap("polylines");

    let opt = optimize_node_positions(&graph, &skeleton, config.node_iters, config.node_step_tol_mult * r);
    flags.node_optimization_converged = opt.converged;
    diagnostics.node_objective_history = opt.objective_history;
    let graph = opt.graph;
    counts.graph_nodes = graph.nodes.len();
    counts.graph_edges = graph.edges.len();
    timer.lap("graph-optimization");

    let degrees = graph.degrees();
    let mut corner_nodes = reconcile_corners(&graph);
    for (i, kind) in graph.node_kind.iter().enumerate() {
        if *kind == NodeKind::CornerCenter && degrees[i] == 2 {
            corner_nodes.push(i);
        }
    }
    corner_nodes.sort_unstable();
    flags.isolated_corner_clusters = corner_nodes.iter().filter(|&&i| degrees[i] == 0).count();
    corner_nodes.retain(|&i| degrees[i] > 0);

    let paths = partition_into_paths(&graph, &corner_nodes)?;
    counts.paths = paths.len();
    let paths = parameterize_paths(&paths, &graph, &skeleton);
    let fitted: Vec<Option<(BSplineCurve, bool, Vec<f64>)>> = paths
        .par_iter()
        .map(|path| {
            if path.assigned_points.is_empty() || !(path.length() > 0.0) {
                return Ok(None);
            }
            let fit = fit_spline(path, &graph.nodes, &skeleton, config.spline_degree)?;
            let samples = PathSamples::from_path(path, &skeleton);
            let opt = optimize_control_points(&fit.curve, &samples, config.spline_iters, config.spline_step_tol_mult * r);
            Ok(Some((opt.curve, fit.degraded || opt.degraded, opt.objective_history)))
        })
        .collect::<Result<_>>()?;
    let mut curves = Vec::new();
    let mut degraded = Vec::new();
    for f in fitted {
        match f {
            Some((curve, bad, history)) => {
                curves.push(curve);
                degraded.push(bad);
                diagnostics.spline_objective_histories.push(history);
            }
            None => counts.dropped_paths += 1,
        }
    }
    flags.degraded_curves = degraded.iter().filter(|&&d| d).count();
    timer.lap("splines");

    if curves.is_empty() {
        return Err(Error::NoCurves("no path produced a curve".into()));
    }
    let corners: Vec<Point> = corner_nodes.iter().map(|&i| graph.nodes[i]).collect();
    counts.curves = curves.len();
    counts.corners = corners.len();
    info!("extracted {} curves and {} corners", counts.curves, counts.corners);

    Ok(PipelineOutput {
        wireframe: Wireframe { corners, curves },
        manifest: RunManifest { r, config: config.clone(), timings: timer.timings, counts, flags },
        skeleton,
        corner_clusters,
        curve_clusters: segmentation.clusters,
        graph,
        degraded,
        diagnostics,
    })
}
