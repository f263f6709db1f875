use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;

/// Rows as CSV with a header line. Floats use the shortest representation
/// that round-trips, so equal rows give equal bytes.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

/// `results.csv` → `results.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub const RNG_RULE: &str =
    "row i (n-grid position major, replicate minor) uses ChaCha8Rng::seed_from_u64(splitmix64(seed ^ i))";
pub const BASELINE_RULE: &str =
    "ambient baseline uses sensitivity 2 r_E / n with r_E = 2 sin(r/2) on the sphere and e^r - 1 on SPD matrices";

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub experiment: Experiment,
    pub config: &'a ExperimentConfig,
    pub rows: usize,
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
    pub rng_streams: &'static str,
    pub baseline_sensitivity: &'static str,
    pub caveat: &'static str,
}

impl<'a> RunManifest<'a> {
    pub fn new(experiment: Experiment, config: &'a ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            library_version: manifold_dp::VERSION,
            experiment,
            config,
            rows: 0,
            outputs: Vec::new(),
            wall_time_secs: 0.0,
            rng_streams: RNG_RULE,
            baseline_sensitivity: BASELINE_RULE,
            caveat: manifold_dp::mechanism::MCMC_CAVEAT,
        }
    }
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
