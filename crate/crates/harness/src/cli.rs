use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use manifold_dp::frechet::{frechet_mean, Dataset};
use manifold_dp::mechanism::privatize_frechet_mean;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::experiments::{
    run_circle_demo, run_projection, run_sensitivity, run_tangent_bound, run_utility,
    summarize_utility,
};
use crate::output::{csv_bytes, emit, sibling, RunManifest};
use crate::seed::row_rng;

pub const SEED_ENV: &str = "MANIFOLD_DP_SEED";

#[derive(Debug, Parser)]
#[command(name = "manifold-dp", version, about = "Differentially private Fréchet means on manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fréchet mean of a JSON dataset.
    Mean(RunArgs),
    /// Private Fréchet mean of a JSON dataset, with its audit record.
    Privatize(RunArgs),
    /// Neighboring-dataset mean distances against the sensitivity bounds.
    SensitivitySim(RunArgs),
    /// Intrinsic against ambient-baseline release error.
    UtilitySim(RunArgs),
    /// Tangent-distance bounds over a scan of ball radii on the sphere.
    TangentBound(RunArgs),
    /// Subspace projection of Euclidean Laplace noise.
    ProjectionCheck(RunArgs),
    /// Single-record sensitivity of the mean on the circle.
    CircleDemo(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config and the environment.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// JSON dataset for `mean` and `privatize`.
    #[arg(long)]
    data: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::Mean(a) => (Experiment::Mean, a),
            Command::Privatize(a) => (Experiment::Privatize, a),
            Command::SensitivitySim(a) => (Experiment::Sensitivity, a),
            Command::UtilitySim(a) => (Experiment::Utility, a),
            Command::TangentBound(a) => (Experiment::TangentBound, a),
            Command::ProjectionCheck(a) => (Experiment::Projection, a),
            Command::CircleDemo(a) => (Experiment::CircleDemo, a),
        }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Config file, then `MANIFOLD_DP_SEED`, then command-line flags.
fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v
            .trim()
            .parse()
            .map_err(|_| HarnessError::Config(format!("{SEED_ENV}={v} is not a 64-bit seed")))?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(out) = &args.out {
        cfg.out_path = Some(out.to_string_lossy().into_owned());
    }
    Ok(cfg)
}

fn load_dataset(args: &RunArgs) -> Result<Dataset> {
    let path = args
        .data
        .as_ref()
        .ok_or_else(|| HarnessError::Config("--data is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("invalid dataset {}: {e}", path.display())))
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn execute(command: &Command) -> Result<()> {
    let (experiment, args) = command.parts();
    let cfg = resolve_config(args)?;
    cfg.validate_for(experiment)?;
    let out = cfg.out_path.as_deref().map(Path::new);
    let started = Instant::now();

    let (rows, extra) = match experiment {
        Experiment::Mean => {
            let data = load_dataset(args)?;
            return emit_json(out, &frechet_mean(&data, &cfg.solver)?);
        }
        Experiment::Privatize => {
            let data = load_dataset(args)?;
            let mech = cfg.mechanism_config_for(data.ball().manifold().kind())?;
            let mut rng = row_rng(cfg.seed, 0);
            let result = privatize_frechet_mean(&data, &mech, &cfg.solver, &mut rng)?;
            #[derive(Serialize)]
            struct Output<'a> {
                point: &'a manifold_dp::Point,
                audit: &'a manifold_dp::Audit,
                mean: &'a manifold_dp::MeanResult,
            }
            return emit_json(
                out,
                &Output {
                    point: &result.release.point,
                    audit: &result.release.audit,
                    mean: &result.mean,
                },
            );
        }
        Experiment::Sensitivity => {
            let r = run_sensitivity(&cfg)?;
            (r.len(), vec![("", csv_bytes(&r)?)])
        }
        Experiment::Utility => {
            let r = run_utility(&cfg)?;
            let summary = csv_bytes(&summarize_utility(&r))?;
            (r.len(), vec![("", csv_bytes(&r)?), ("summary.csv", summary)])
        }
        Experiment::TangentBound => {
            let r = run_tangent_bound(&cfg)?;
            (r.len(), vec![("", csv_bytes(&r)?)])
        }
        Experiment::Projection => (1, vec![("", csv_bytes(&[run_projection(&cfg)?])?)]),
        Experiment::CircleDemo => {
            let r = run_circle_demo(&cfg);
            (r.len(), vec![("", csv_bytes(&r)?)])
        }
    };

    let mut manifest = RunManifest::new(experiment, &cfg);
    manifest.rows = rows;
    for (suffix, bytes) in &extra {
        match (out, suffix.is_empty()) {
            (Some(p), true) => {
                emit(Some(p), bytes)?;
                manifest.outputs.push(p.display().to_string());
            }
            (Some(p), false) => {
                let path = sibling(p, suffix);
                emit(Some(&path), bytes)?;
                manifest.outputs.push(path.display().to_string());
            }
            // Without an output path only the main table goes to stdout.
            (None, true) => emit(None, bytes)?,
            (None, false) => {}
        }
    }
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&manifest)?;
    match out {
        Some(p) => std::fs::write(sibling(p, "manifest.json"), text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}
