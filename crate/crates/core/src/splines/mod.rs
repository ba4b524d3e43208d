//! Corner-to-corner paths and the B-spline curves fitted to them.

mod bspline;
mod fit;
mod optimize;
mod paths;

pub use bspline::{clamped_knots, periodic_knots, BSplineCurve, RawCurve};
pub use fit::{fit_closed_with_knots, fit_open_with_knots, fit_spline, thin_knots, PathSamples, SplineFit};
pub use optimize::{optimize_control_points, spline_objective, ControlOptimization};
pub use paths::{parameterize_path, parameterize_paths, partition_into_paths, CurvePath};
