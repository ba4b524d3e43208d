//! `wirefit`: extract, evaluate, synthesize and export parametric wireframes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use wirefit_core::cloud::{load_point_cloud, save_point_cloud};
use wirefit_core::metrics::{evaluate, format_table, EvaluationReport, Summary};
use wirefit_core::pipeline::RunManifest;
use wirefit_core::synthgen::{make_shape, sample_field};
use wirefit_core::{extract_wireframe, Error, Wireframe};

use config::{resolve, ParamFlags};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "WIREFIT_THREADS";

/// Exit codes, one per failure class.
mod exit {
    pub const ARGUMENT: u8 = 2;
    pub const IO: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const TOO_SMALL: u8 = 5;
    pub const NO_SHARP_FEATURES: u8 = 6;
    pub const NO_CURVES: u8 = 7;
    pub const INTERNAL: u8 = 8;
}

#[derive(Debug, Parser)]
#[command(name = "wirefit", version, about = "Parametric wireframes from point clouds with distance-to-feature fields")]
struct Cli {
    /// Raise log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

// parsed once, so the size of the flag set does not matter
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
enum Command {
    /// Extract a wireframe from an XYZD point cloud.
    Extract {
        input: PathBuf,
        /// Output wireframe JSON.
        #[arg(short, long)]
        output: PathBuf,
        /// Run manifest path; defaults to the output with a `.manifest.json` suffix.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// TOML file with pipeline parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Compare predicted wireframes against ground truth.
    Evaluate {
        /// Predicted wireframe JSON (single mode).
        #[arg(required_unless_present = "batch", conflicts_with = "batch")]
        predicted: Option<PathBuf>,
        /// Ground-truth wireframe JSON (single mode).
        #[arg(required_unless_present = "batch", conflicts_with = "batch")]
        truth: Option<PathBuf>,
        /// Directory of `NAME.truth.json` files with predictions in `NAME.json`.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Curve sampling spacing.
        #[arg(long, default_value_t = 0.01)]
        spacing: f64,
        /// Label for the summary table.
        #[arg(long, default_value = "wirefit")]
        method: String,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample a synthetic preset with its exact distance field.
    Synth {
        preset: String,
        #[arg(long, default_value_t = 0.02)]
        r: f64,
        /// Standard deviation of the positional noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Uniform scale in (0, 1] about the center of the unit cube.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Sample a wireframe into OBJ polylines or XYZD points.
    Export {
        wireframe: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        #[arg(long, default_value_t = 0.01)]
        spacing: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    XyzdSamples,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Argument(_) | Error::Domain { .. } => exit::ARGUMENT,
                Error::Io(_) => exit::IO,
                Error::Parse { .. } | Error::Validation(_) | Error::Json(_) => exit::PARSE,
                Error::TooSmall { .. } => exit::TOO_SMALL,
                Error::NoSharpFeatures => exit::NO_SHARP_FEATURES,
                Error::NoCurves(_) => exit::NO_CURVES,
                Error::Internal(_) => exit::INTERNAL,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return exit::IO;
        }
    }
    exit::INTERNAL
}

fn manifest_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.manifest.json"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    fs::write(path, text + "\n").map_err(Error::from).with_context(|| format!("writing {}", path.display()))
}

fn cmd_extract(
    input: &Path,
    output: &Path,
    manifest: Option<&Path>,
    config_file: Option<&Path>,
    params: &ParamFlags,
) -> Result<()> {
    let config = resolve(config_file, params)?;
    let cloud = load_point_cloud(input).with_context(|| format!("loading {}", input.display()))?;
    info!("{} points, r = {}", cloud.len(), config.r.unwrap_or(cloud.sampling_distance()));
    let out = extract_wireframe(&cloud, &config)?;
    out.wireframe.save(output).with_context(|| format!("writing {}", output.display()))?;
    let manifest_file = manifest.map(Path::to_path_buf).unwrap_or_else(|| manifest_path(output));
    let m: &RunManifest = &out.manifest;
    write_json(&manifest_file, m)?;
    if m.flags.degraded_curves > 0 {
        warn!("{} curves were fitted in degraded mode", m.flags.degraded_curves);
    }
    println!(
        "{}: {} curves, {} corners -> {}",
        input.display(),
        m.counts.curves,
        m.counts.corners,
        output.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ShapeReport {
    name: String,
    report: EvaluationReport,
}

#[derive(Debug, Serialize)]
struct BatchReport {
    summary: Summary,
    shapes: Vec<ShapeReport>,
}

fn load_prediction(path: &Path) -> Wireframe {
    match Wireframe::load(path) {
        Ok(w) => w,
        Err(e) => {
            warn!("{}: {e}; counted as a failure", path.display());
            Wireframe { corners: Vec::new(), curves: Vec::new() }
        }
    }
}

fn cmd_evaluate_batch(dir: &Path, spacing: f64, method: &str, report: Option<&Path>) -> Result<()> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(Error::from)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().and_then(|n| n.strip_suffix(".truth.json")).map(str::to_string))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::Argument(format!("no *.truth.json files in {}", dir.display())).into());
    }
    let shapes: Vec<ShapeReport> = names
        .par_iter()
        .map(|name| {
            let truth_path = dir.join(format!("{name}.truth.json"));
            let truth = Wireframe::load(&truth_path).with_context(|| format!("reading {}", truth_path.display()))?;
            let predicted = load_prediction(&dir.join(format!("{name}.json")));
            let report = evaluate(&predicted, &truth, spacing)?;
            Ok(ShapeReport { name: name.clone(), report })
        })
        .collect::<Result<_>>()?;
    for s in &shapes {
        match (s.report.chamfer, s.report.hausdorff) {
            (Some(c), Some(h)) => println!("{:<32} CD {c:.4}  HD {h:.4}", s.name),
            _ => println!("{:<32} failed", s.name),
        }
    }
    let summary = Summary::from_reports(method, shapes.iter().map(|s| &s.report));
    print!("{}", format_table(std::slice::from_ref(&summary)));
    if let Some(path) = report {
        write_json(path, &BatchReport { summary, shapes })?;
    }
    Ok(())
}

fn cmd_evaluate(predicted: &Path, truth: &Path, spacing: f64, method: &str, report: Option<&Path>) -> Result<()> {
    let pred = Wireframe::load(predicted).with_context(|| format!("reading {}", predicted.display()))?;
    let truth_w = Wireframe::load(truth).with_context(|| format!("reading {}", truth.display()))?;
    let rep = evaluate(&pred, &truth_w, spacing)?;
    let summary = Summary::from_reports(method, [&rep]);
    print!("{}", format_table(&[summary]));
    if let Some(path) = report {
        write_json(path, &rep)?;
    }
    Ok(())
}

fn cmd_synth(preset: &str, r: f64, noise: f64, seed: u64, scale: f64, out_dir: &Path) -> Result<()> {
    let shape = make_shape(preset, scale)?;
    let cloud = sample_field(&shape, r, noise, seed)?;
    fs::create_dir_all(out_dir).map_err(Error::from).with_context(|| format!("creating {}", out_dir.display()))?;
    let cloud_path = out_dir.join(format!("{preset}.xyzd"));
    let truth_path = out_dir.join(format!("{preset}.truth.json"));
    save_point_cloud(&cloud, &cloud_path).with_context(|| format!("writing {}", cloud_path.display()))?;
    shape.truth_wireframe().save(&truth_path).with_context(|| format!("writing {}", truth_path.display()))?;
    println!("{preset}: {} points -> {}, {}", cloud.len(), cloud_path.display(), truth_path.display());
    Ok(())
}

fn cmd_export(wireframe: &Path, format: Format, spacing: f64, output: &Path) -> Result<()> {
    let w = Wireframe::load(wireframe).with_context(|| format!("reading {}", wireframe.display()))?;
    let text = match format {
        Format::Obj => w.to_obj(spacing)?,
        Format::XyzdSamples => w.to_xyzd_samples(spacing)?,
    };
    fs::write(output, text).map_err(Error::from).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .parse()
            .map_err(|_| Error::Argument(format!("{THREADS_ENV} must be a thread count, got '{value}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Extract { input, output, manifest, config, params } => {
            cmd_extract(&input, &output, manifest.as_deref(), config.as_deref(), &params)
        }
        Command::Evaluate { predicted, truth, batch, spacing, method, report } => {
            if !(spacing > 0.0) {
                return Err(Error::Argument(format!("spacing must be positive, got {spacing}")).into());
            }
            match (batch, predicted, truth) {
                (Some(dir), _, _) => cmd_evaluate_batch(&dir, spacing, &method, report.as_deref()),
                (None, Some(p), Some(t)) => cmd_evaluate(&p, &t, spacing, &method, report.as_deref()),
                _ => Err(Error::Argument("need PREDICTED and TRUTH, or --batch DIR".into()).into()),
            }
        }
        Command::Synth { preset, r, noise, seed, scale, out_dir } => cmd_synth(&preset, r, noise, seed, scale, &out_dir),
        Command::Export { wireframe, format, spacing, output } => cmd_export(&wireframe, format, spacing, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
