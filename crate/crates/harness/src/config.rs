use std::f64::consts::FRAC_PI_8;
use std::path::Path;

use manifold_dp::frechet::MeanSolverOptions;
use manifold_dp::geometry::{BallSpec, ManifoldDescriptor, ManifoldKind, Point};
use manifold_dp::mechanism::{MechanismConfig, ScaleRule, SensitivitySource, DEFAULT_GRID_N};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Sensitivity,
    Utility,
    TangentBound,
    Projection,
    CircleDemo,
    Mean,
    Privatize,
}

/// Optional replacements for the mechanism defaults of a manifold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismOverrides {
    pub scale_rule: Option<ScaleRule>,
    pub sensitivity_source: Option<SensitivitySource>,
    pub condition_on_ball: Option<bool>,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When set, must agree with the subcommand.
    pub experiment: Option<Experiment>,
    pub manifold: ManifoldKind,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub epsilon: f64,
    /// Ball radius; π/8 on the sphere and 1.5 on SPD matrices when unset.
    pub r: Option<f64>,
    /// Matrix order for SPD experiments.
    pub k: usize,
    /// Wishart degrees of freedom; `k` when unset.
    pub df: Option<usize>,
    pub seed: u64,
    pub out_path: Option<String>,
    /// Boundary points for the empirical tangent bound.
    pub grid_n: usize,
    /// Radii in the tangent-bound scan.
    pub r_points: usize,
    /// Projection check: subspace dimension `d`, ambient dimension `D`.
    pub d: usize,
    #[serde(rename = "D")]
    pub ambient_dim: usize,
    pub sigma: f64,
    pub n_draws: usize,
    pub solver: MeanSolverOptions,
    pub mechanism: MechanismOverrides,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            manifold: ManifoldKind::Sphere,
            n_grid: (1..=10).map(|i| 20 * i).collect(),
            replicates: 1000,
            epsilon: 1.0,
            r: None,
            k: 2,
            df: None,
            seed: 0,
            out_path: None,
            grid_n: DEFAULT_GRID_N,
            r_points: 50,
            d: 3,
            ambient_dim: 6,
            sigma: 1.0,
            n_draws: 1_000_000,
            solver: MeanSolverOptions::default(),
            mechanism: MechanismOverrides::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn radius(&self) -> f64 {
        self.r.unwrap_or(match self.manifold {
            ManifoldKind::Sphere => FRAC_PI_8,
            ManifoldKind::Spdm => 1.5,
        })
    }

    pub fn df(&self) -> usize {
        self.df.unwrap_or(self.k)
    }

    pub fn descriptor(&self) -> Result<ManifoldDescriptor> {
        Ok(match self.manifold {
            ManifoldKind::Sphere => ManifoldDescriptor::sphere(2)?,
            ManifoldKind::Spdm => ManifoldDescriptor::spdm(self.k)?,
        })
    }

    /// The data ball: centered at the north pole or at the identity.
    pub fn ball(&self) -> Result<BallSpec> {
        let center = match self.manifold {
            ManifoldKind::Sphere => Point::north_pole(2)?,
            ManifoldKind::Spdm => Point::identity(self.k)?,
        };
        BallSpec::new(center, self.radius()).map_err(|e| config_err(e.to_string()))
    }

    pub fn mechanism_config(&self) -> Result<MechanismConfig> {
        self.mechanism_config_for(self.manifold)
    }

    /// Defaults for `kind` with the configured overrides applied.
    pub fn mechanism_config_for(&self, kind: ManifoldKind) -> Result<MechanismConfig> {
        let o = &self.mechanism;
        let mut cfg = MechanismConfig::for_manifold(kind, self.epsilon);
        if let Some(v) = o.scale_rule {
            cfg.scale_rule = v;
        }
        if let Some(v) = o.sensitivity_source {
            cfg.sensitivity_source = v;
        }
        if let Some(v) = o.condition_on_ball {
            cfg.condition_on_ball = v;
        }
        if let Some(v) = o.burn_in {
            cfg.burn_in = v;
        }
        if let Some(v) = o.thinning {
            cfg.thinning = v;
        }
        cfg.validate().map_err(|e| config_err(e.to_string()))?;
        if kind == ManifoldKind::Spdm
            && matches!(cfg.sensitivity_source, SensitivitySource::Empirical { .. })
        {
            return Err(config_err("the empirical sensitivity is only available on the sphere"));
        }
        Ok(cfg)
    }

    /// Checks the fields the given experiment uses.
    pub fn validate_for(&self, experiment: Experiment) -> Result<()> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(config_err(format!(
                    "config is for experiment {e:?}, not {experiment:?}"
                )));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(config_err("epsilon must be positive"));
        }
        match experiment {
            Experiment::Sensitivity | Experiment::Utility => {
                if self.replicates < 1 {
                    return Err(config_err("replicates must be at least 1"));
                }
                self.check_n_grid()?;
                if self.manifold == ManifoldKind::Spdm && self.df() < self.k {
                    return Err(config_err(format!("df {} is below k {}", self.df(), self.k)));
                }
                self.ball()?;
                self.mechanism_config()?;
            }
            Experiment::CircleDemo => {
                self.check_n_grid()?;
                if let Some(n) = self.n_grid.iter().find(|n| *n % 2 == 1) {
                    return Err(config_err(format!("circle demo needs even n, got {n}")));
                }
            }
            Experiment::TangentBound => {
                if self.r_points < 1 || self.grid_n < 8 {
                    return Err(config_err("need r_points >= 1 and grid_n >= 8"));
                }
            }
            Experiment::Projection => {
                if self.d < 1 || self.d > self.ambient_dim {
                    return Err(config_err("need 1 <= d <= D"));
                }
                if !(self.sigma.is_finite() && self.sigma >= 0.0) || self.n_draws < 1 {
                    return Err(config_err("need sigma >= 0 and n_draws >= 1"));
                }
            }
            // Checked against the dataset's manifold once it is loaded.
            Experiment::Mean | Experiment::Privatize => {}
        }
        Ok(())
    }

    fn check_n_grid(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.iter().any(|n| *n < 2) {
            return Err(config_err("n_grid must be non-empty with entries >= 2"));
        }
        Ok(())
    }
}
