//! Topological graph construction.
//!
//! Each curve cluster becomes a polyline: open clusters start from their two
//! endpoints, closed ones from a triangle, and both are refined where the
//! field disagrees with the distance to the polyline. Polylines are then
//! attached to corner centers and the node positions are optimized so that
//! distances to the graph match the field.

mod endpoints;
mod graph;
mod optimize;
mod polyline;

pub use endpoints::{detect_endpoints, endpoint_scores, Endpoints};
pub use graph::{
    assemble_graph, graph_objective, project_all, project_to_graph, reconcile_corners, GraphProjection, NodeKind,
    TopologicalGraph,
};
pub use optimize::{optimize_node_positions, NodeOptimization};
pub use polyline::{
    init_closed_polyline, init_open_polyline, point_residual, subdivide_polyline, Polyline, Subdivision,
};
