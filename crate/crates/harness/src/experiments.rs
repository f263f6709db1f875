//! The simulation experiments. Each returns its rows in output order.

use manifold_dp::frechet::{frechet_mean, Dataset};
use manifold_dp::geometry::{distance, euclidean_distance, BallSpec, ManifoldKind, Point};
use manifold_dp::mechanism::{
    calibrate, curvature_factor, project_subspace_noise, release_euclidean,
    sample_riemannian_laplace, sensitivity, tangent_bound_empirical, tangent_bound_theoretical,
};
use manifold_dp::spdm::sample_ball_wishart;
use manifold_dp::sphere::sample_polar_cap;
use rand::Rng;
use serde::Serialize;

use crate::circle::duplicate_swap_sensitivity;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::seed::row_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRecord {
    pub n: usize,
    pub replicate: usize,
    pub distance: f64,
    pub bound_theoretical: f64,
    pub bound_empirical: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityRecord {
    pub n: usize,
    pub replicate: usize,
    pub dist_intrinsic: f64,
    pub dist_euclidean: f64,
    pub off_manifold: bool,
    pub sigma_intrinsic: f64,
    pub sigma_euclidean: f64,
}

/// Per-n aggregate of [`UtilityRecord`]s. Standard errors are the sample
/// standard deviation over `√replicates`; `reduction` is the relative
/// decrease of the intrinsic mean distance against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilitySummary {
    pub n: usize,
    pub replicates: usize,
    pub mean_intrinsic: f64,
    pub se_intrinsic: f64,
    pub mean_euclidean: f64,
    pub se_euclidean: f64,
    pub off_manifold_fraction: f64,
    pub reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentBoundRecord {
    pub r: f64,
    pub two_r: f64,
    pub lemma_bound: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionRecord {
    pub d: usize,
    #[serde(rename = "D")]
    pub ambient_dim: usize,
    pub sigma: f64,
    pub n_draws: usize,
    pub estimate: f64,
    pub analytic: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleRecord {
    pub n: usize,
    pub max_sensitivity: f64,
}

/// One data point from the experiment's generator: the polar-cap sampler
/// on the sphere, the Wishart rejection sampler on SPD matrices.
pub fn draw_point<R: Rng + ?Sized>(cfg: &ExperimentConfig, ball: &BallSpec, rng: &mut R) -> Result<Point> {
    Ok(match cfg.manifold {
        ManifoldKind::Sphere => sample_polar_cap(ball.manifold(), ball.radius(), rng)?,
        ManifoldKind::Spdm => sample_ball_wishart(ball, cfg.df(), rng)?,
    })
}

pub fn draw_dataset<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    ball: &BallSpec,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let points = (0..n)
        .map(|_| draw_point(cfg, ball, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(points, ball.clone())?)
}

/// Iterates `(n, replicate, row)` in output order.
fn rows(cfg: &ExperimentConfig) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
    let reps = cfg.replicates;
    cfg.n_grid.iter().enumerate().flat_map(move |(i, &n)| {
        (0..reps).map(move |rep| (n, rep, (i * reps + rep) as u64))
    })
}

/// Distance between the means of a dataset and of a neighbor that
/// replaces its last point with a fresh draw, next to the sensitivity
/// bounds.
pub fn run_sensitivity(cfg: &ExperimentConfig) -> Result<Vec<SensitivityRecord>> {
    let ball = cfg.ball()?;
    let kappa = ball.manifold().kappa_upper();
    let r = ball.radius();
    let h = curvature_factor(r, kappa)?;
    // The empirical scan exists for the sphere only; on SPD matrices the
    // theoretical bound is already attained.
    let tangent_bound = match cfg.manifold {
        ManifoldKind::Sphere => tangent_bound_empirical(&ball, cfg.grid_n)?,
        ManifoldKind::Spdm => tangent_bound_theoretical(r, kappa)?,
    };
    let mut out = Vec::with_capacity(cfg.n_grid.len() * cfg.replicates);
    for (n, replicate, row) in rows(cfg) {
        let mut rng = row_rng(cfg.seed, row);
        let data = draw_dataset(cfg, &ball, n, &mut rng)?;
        let neighbor = data.with_replaced(n - 1, draw_point(cfg, &ball, &mut rng)?)?;
        let a = frechet_mean(&data, &cfg.solver)?;
        let b = frechet_mean(&neighbor, &cfg.solver)?;
        out.push(SensitivityRecord {
            n,
            replicate,
            distance: distance(&a.point, &b.point)?,
            bound_theoretical: sensitivity(n, r, kappa)?,
            bound_empirical: tangent_bound / (n as f64 * h),
            converged: a.converged && b.converged,
        });
    }
    Ok(out)
}

/// Embedding distances from the mean to the intrinsic release and to the
/// ambient baseline release.
pub fn run_utility(cfg: &ExperimentConfig) -> Result<Vec<UtilityRecord>> {
    let ball = cfg.ball()?;
    let mech = cfg.mechanism_config()?;
    let audits = cfg
        .n_grid
        .iter()
        .map(|&n| calibrate(n, &ball, &mech))
        .collect::<manifold_dp::Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(cfg.n_grid.len() * cfg.replicates);
    for (n, replicate, row) in rows(cfg) {
        let audit = &audits[row as usize / cfg.replicates];
        let mut rng = row_rng(cfg.seed, row);
        let data = draw_dataset(cfg, &ball, n, &mut rng)?;
        let mean = frechet_mean(&data, &cfg.solver)?.point;
        let private = sample_riemannian_laplace(&mean, audit.sigma, &mech, Some(&ball), &mut rng)?;
        let baseline = release_euclidean(&mean, n, &ball, &mech, &mut rng)?;
        let center = mean.embedding();
        out.push(UtilityRecord {
            n,
            replicate,
            dist_intrinsic: euclidean_distance(&center, &private.embedding()),
            dist_euclidean: euclidean_distance(&center, &baseline.ambient),
            off_manifold: !baseline.on_manifold,
            sigma_intrinsic: audit.sigma,
            sigma_euclidean: baseline.sigma,
        });
    }
    Ok(out)
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups rows by `n`, keeping the order in which each `n` first appears.
pub fn summarize_utility(records: &[UtilityRecord]) -> Vec<UtilitySummary> {
    let mut ns: Vec<usize> = Vec::new();
    for r in records {
        if !ns.contains(&r.n) {
            ns.push(r.n);
        }
    }
    ns.into_iter()
        .map(|n| {
            let group: Vec<&UtilityRecord> = records.iter().filter(|r| r.n == n).collect();
            let intrinsic: Vec<f64> = group.iter().map(|r| r.dist_intrinsic).collect();
            let euclidean: Vec<f64> = group.iter().map(|r| r.dist_euclidean).collect();
            let (mi, si) = mean_se(&intrinsic);
            let (me, se) = mean_se(&euclidean);
            let off = group.iter().filter(|r| r.off_manifold).count() as f64;
            UtilitySummary {
                n,
                replicates: group.len(),
                mean_intrinsic: mi,
                se_intrinsic: si,
                mean_euclidean: me,
                se_euclidean: se,
                off_manifold_fraction: off / group.len() as f64,
                reduction: 1.0 - mi / me,
            }
        })
        .collect()
}

/// Radii at the midpoints of `r_points` equal cells of `(0, π/4)`. The
/// right end is excluded because the curvature factor vanishes there.
pub fn tangent_bound_radii(r_points: usize) -> Vec<f64> {
    let step = std::f64::consts::FRAC_PI_4 / r_points as f64;
    (0..r_points).map(|i| (i as f64 + 0.5) * step).collect()
}

/// Flat bound `2r`, curved bound `2r(2 − h)` and the grid estimate on the
/// unit 2-sphere for a scan of radii.
pub fn run_tangent_bound(cfg: &ExperimentConfig) -> Result<Vec<TangentBoundRecord>> {
    let center = Point::north_pole(2)?;
    tangent_bound_radii(cfg.r_points)
        .into_iter()
        .map(|r| {
            let ball = BallSpec::new(center.clone(), r)?;
            Ok(TangentBoundRecord {
                r,
                two_r: 2.0 * r,
                lemma_bound: tangent_bound_theoretical(r, 1.0)?,
                empirical: tangent_bound_empirical(&ball, cfg.grid_n)?,
            })
        })
        .collect()
}

/// Monte Carlo check of `E‖P Y‖² = σ² d (D + 1)`.
pub fn run_projection(cfg: &ExperimentConfig) -> Result<ProjectionRecord> {
    let mut rng = row_rng(cfg.seed, 0);
    let estimate = project_subspace_noise(cfg.d, cfg.ambient_dim, cfg.sigma, cfg.n_draws, &mut rng)?;
    let analytic = cfg.sigma * cfg.sigma * (cfg.d * (cfg.ambient_dim + 1)) as f64;
    let rel_err = if analytic > 0.0 {
        (estimate - analytic).abs() / analytic
    } else {
        estimate.abs()
    };
    Ok(ProjectionRecord {
        d: cfg.d,
        ambient_dim: cfg.ambient_dim,
        sigma: cfg.sigma,
        n_draws: cfg.n_draws,
        estimate,
        analytic,
        rel_err,
    })
}

pub fn run_circle_demo(cfg: &ExperimentConfig) -> Vec<CircleRecord> {
    cfg.n_grid
        .iter()
        .map(|&n| CircleRecord {
            n,
            max_sensitivity: duplicate_swap_sensitivity(n),
        })
        .collect()
}
