use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use toml::{Table, Value};
use wirefit_core::PipelineConfig;

/// Pipeline parameters settable from the command line. Each one overrides
/// the same key in the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamFlags {
    /// Sampling distance; estimated from the cloud when neither the file header nor this flag sets it.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub t_dist_mult: Option<f64>,
    #[arg(long)]
    pub r_corner_mult: Option<f64>,
    #[arg(long)]
    pub t_variance: Option<f64>,
    #[arg(long)]
    pub t_corner: Option<f64>,
    #[arg(long)]
    pub fps_ratio: Option<f64>,
    #[arg(long)]
    pub merge_radius_mult: Option<f64>,
    #[arg(long)]
    pub corner_margin_mult: Option<f64>,
    #[arg(long)]
    pub connect_radius_mult: Option<f64>,
    #[arg(long)]
    pub endpoint_radius_mult: Option<f64>,
    #[arg(long)]
    pub v_open_threshold: Option<f64>,
    #[arg(long)]
    pub t_split_mult: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    #[arg(long)]
    pub attach_radius_corner_mult: Option<f64>,
    #[arg(long)]
    pub node_iters: Option<u32>,
    #[arg(long)]
    pub node_step_tol_mult: Option<f64>,
    #[arg(long)]
    pub spline_degree: Option<u32>,
    #[arg(long)]
    pub spline_iters: Option<u32>,
    #[arg(long)]
    pub spline_step_tol_mult: Option<f64>,
}

impl ParamFlags {
    fn overrides(&self) -> Vec<(&'static str, Value)> {
        let f = |name, v: Option<f64>| v.map(|x| (name, Value::Float(x)));
        let i = |name, v: Option<u32>| v.map(|x| (name, Value::Integer(x.into())));
        [
            f("r", self.r),
            f("t_dist_mult", self.t_dist_mult),
            f("r_corner_mult", self.r_corner_mult),
            f("t_variance", self.t_variance),
            f("t_corner", self.t_corner),
            f("fps_ratio", self.fps_ratio),
            f("merge_radius_mult", self.merge_radius_mult),
            f("corner_margin_mult", self.corner_margin_mult),
            f("connect_radius_mult", self.connect_radius_mult),
            f("endpoint_radius_mult", self.endpoint_radius_mult),
            f("v_open_threshold", self.v_open_threshold),
            f("t_split_mult", self.t_split_mult),
            i("max_depth", self.max_depth),
            f("attach_radius_corner_mult", self.attach_radius_corner_mult),
            i("node_iters", self.node_iters),
            f("node_step_tol_mult", self.node_step_tol_mult),
            i("spline_degree", self.spline_degree),
            i("spline_iters", self.spline_iters),
            f("spline_step_tol_mult", self.spline_step_tol_mult),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Defaults, then the TOML file, then flags.
pub fn resolve(file: Option<&Path>, flags: &ParamFlags) -> Result<PipelineConfig> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            text.parse::<Table>()
                .map_err(|e| wirefit_core::Error::Validation(format!("config {}: {e}", path.display())))?
        }
        None => Table::new(),
    };
    for (key, value) in flags.overrides() {
        table.insert(key.to_string(), value);
    }
    let config: PipelineConfig = Value::Table(table)
        .try_into()
        .map_err(|e| wirefit_core::Error::Validation(format!("config: {e}")))?;
    config.validate()?;
    Ok(config)
}
