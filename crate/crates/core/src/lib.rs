//! Parametric wireframe extraction from dense point clouds carrying a
//! per-point distance-to-sharp-feature field.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corners`]: threshold the field into a sharp skeleton, classify local
//!    neighborhoods with PCA and accumulate distance-aware cornerness weights.
//! 2. [`segmentation`]: drop corner clusters and split what remains into
//!    curve clusters with a proximity graph.
//! 3. [`topograph`]: fit polylines to each cluster, attach them to corners and
//!    optimize node positions against the field.
//! 4. [`splines`]: cut the graph into corner-to-corner paths and fit B-spline
//!    curves shaped by the field.
//!
//! [`synthgen`] produces shapes with exact distance fields and ground-truth
//! wireframes, and [`metrics`] closes the loop with Chamfer and Hausdorff
//! distances.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cloud;
pub mod corners;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod pca;
pub mod pipeline;
pub mod sampling;
pub mod segmentation;
pub mod spatial;
pub mod splines;
pub mod synthgen;
pub mod topograph;
pub mod wireframe;

pub use cloud::{PointCloudField, SharpSkeleton};
pub use error::{Error, Result};
pub use geom::{Point, Vec3};
pub use pipeline::{extract_wireframe, PipelineConfig, PipelineOutput};
pub use splines::BSplineCurve;
pub use wireframe::Wireframe;
