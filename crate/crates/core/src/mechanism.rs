//! Sensitivity calibration and the Laplace mechanisms.
//!
//! The intrinsic mechanism releases a draw from the density
//! `∝ exp(−ρ(η, x)/σ)` with respect to the Riemannian volume, footpoint `η`
//! the Fréchet mean. Draws come from a random-walk Metropolis-Hastings chain,
//! so the privacy guarantee holds only up to the chain's approximation
//! error. The Euclidean baseline adds K-norm (ℓ₂ Laplace) noise to the
//! mean's ambient embedding.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::{frechet_mean, Dataset, MeanResult, MeanSolverOptions};
use crate::geometry::{
    distance, exp, log, BallSpec, ManifoldDescriptor, ManifoldKind, Point, TangentVector,
};
use crate::{spdm, sphere};

pub const DEFAULT_BURN_IN: usize = 10_000;
pub const DEFAULT_THINNING: usize = 100;
pub const DEFAULT_GRID_N: usize = 720;
/// Steps per acceptance-rate check in the sampler.
pub const MIXING_WINDOW: usize = 10_000;
/// Minimum acceptance rate over a window before the chain is declared stuck.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-4;
/// Thinned draws the conditioned sampler may discard before giving up.
pub const MAX_CONDITIONED_REJECTIONS: usize = 100_000;

pub const MCMC_CAVEAT: &str = "draws come from a Metropolis-Hastings chain; the epsilon \
    guarantee holds exactly only for exact Laplace draws";

/// How the noise rate follows from sensitivity and budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleRule {
    /// `σ = Δ/ε`, valid when the normalizing constant does not depend on the
    /// footpoint (homogeneous spaces such as spheres and `P(k)`).
    #[default]
    Homogeneous,
    /// `σ = 2Δ/ε`, valid on any manifold.
    General,
}

impl ScaleRule {
    pub fn sigma(self, delta: f64, epsilon: f64) -> f64 {
        match self {
            ScaleRule::Homogeneous => delta / epsilon,
            ScaleRule::General => 2.0 * delta / epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensitivitySource {
    /// `2r(2 − h) / (n h)`.
    Theoretical,
    /// `2r(2 − h)` replaced by the grid maximum of [`tangent_bound_empirical`].
    Empirical { grid_n: usize },
}

impl SensitivitySource {
    /// Default for a manifold: the empirical tangent bound on spheres, the
    /// theoretical (and tight) bound on SPD matrices.
    pub fn default_for(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Sphere => SensitivitySource::Empirical {
                grid_n: DEFAULT_GRID_N,
            },
            ManifoldKind::Spdm => SensitivitySource::Theoretical,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SensitivitySource::Theoretical => "theoretical".into(),
            SensitivitySource::Empirical { grid_n } => format!("empirical({grid_n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub epsilon: f64,
    pub scale_rule: ScaleRule,
    pub sensitivity_source: SensitivitySource,
    pub condition_on_ball: bool,
    pub burn_in: usize,
    pub thinning: usize,
}

impl MechanismConfig {
    pub fn for_manifold(kind: ManifoldKind, epsilon: f64) -> Self {
        Self {
            epsilon,
            scale_rule: ScaleRule::Homogeneous,
            sensitivity_source: SensitivitySource::default_for(kind),
            condition_on_ball: false,
            burn_in: DEFAULT_BURN_IN,
            thinning: DEFAULT_THINNING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.thinning < 1 {
            return Err(Error::Domain("thinning must be at least 1".into()));
        }
        if let SensitivitySource::Empirical { grid_n } = self.sensitivity_source {
            if grid_n < 8 {
                return Err(Error::Domain(format!("grid_n {grid_n} must be at least 8")));
            }
        }
        Ok(())
    }
}

/// Everything that went into the noise scale of one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub n: usize,
    pub r: f64,
    pub kappa: f64,
    pub h: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub sensitivity_source: String,
    pub conditioned: bool,
    pub caveat: String,
}

/// Curvature correction `h(r, κ) = 2r√κ cot(2r√κ)` for κ > 0, and 1 for
/// κ ≤ 0. Requires `2r√κ < π/2`.
pub fn curvature_factor(r: f64, kappa: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} must be non-negative")));
    }
    if kappa <= 0.0 {
        return Ok(1.0);
    }
    let x = 2.0 * r * kappa.sqrt();
    if x >= FRAC_PI_2 {
        return Err(Error::AssumptionViolation(format!(
            "2r√κ = {x} is not below π/2"
        )));
    }
    if x < 1e-4 {
        let x2 = x * x;
        return Ok(1.0 - x2 / 3.0 - x2 * x2 / 45.0);
    }
    Ok(x / x.tan())
}

/// Global sensitivity bound of the Fréchet mean: `2r(2 − h) / (n h)`.
pub fn sensitivity(n: usize, r: f64, kappa: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let h = curvature_factor(r, kappa)?;
    Ok(tangent_bound_theoretical(r, kappa)? / (n as f64 * h))
}

/// Uniform bound on `‖log_m x − log_m y‖` over a ball of radius `r`:
/// `2r(2 − h)`.
pub fn tangent_bound_theoretical(r: f64, kappa: f64) -> Result<f64> {
    let h = curvature_factor(r, kappa)?;
    Ok(2.0 * r * (2.0 - h))
}

/// Grid estimate of `max ‖log_{x₁} xᵢ − log_{x₁} xⱼ‖` over `grid_n` evenly
/// spaced points on the boundary of a ball on `S²`, footpoint fixed at the
/// first grid point.
pub fn tangent_bound_empirical(ball: &BallSpec, grid_n: usize) -> Result<f64> {
    let m = ball.manifold();
    if m.kind() != ManifoldKind::Sphere || m.dim() != 2 {
        return Err(Error::Unsupported(
            "the empirical tangent bound is implemented for S^2 only".into(),
        ));
    }
    if grid_n < 8 {
        return Err(Error::Domain(format!("grid_n {grid_n} must be at least 8")));
    }
    let scale = m.length_scale();
    let angle = ball.radius() / scale;
    let (e1, e2) = orthonormal_frame(ball.center().coords());
    let c = ball.center().coords();
    let (sa, ca) = angle.sin_cos();
    let boundary: Vec<Point> = (0..grid_n)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / grid_n as f64;
            let (sp, cp) = phi.sin_cos();
            let coords: Vec<f64> = (0..3)
                .map(|j| ca * c[j] + sa * (cp * e1[j] + sp * e2[j]))
                .collect();
            Point::new(*m, coords)
        })
        .collect::<Result<_>>()?;
    let foot = &boundary[0];
    let logs: Vec<Vec<f64>> = boundary
        .iter()
        .map(|p| log(foot, p).map(|v| v.coords().to_vec()))
        .collect::<Result<_>>()?;
    let mut best = 0.0f64;
    for i in 0..logs.len() {
        for j in (i + 1)..logs.len() {
            let d2: f64 = logs[i]
                .iter()
                .zip(&logs[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.max(d2);
        }
    }
    Ok(best.sqrt() * scale)
}

/// Two unit vectors completing `c` to an orthonormal basis of `R³`.
fn orthonormal_frame(c: &[f64]) -> ([f64; 3], [f64; 3]) {
    // Cross with the coordinate axis least aligned with c.
    let axis = (0..3)
        .min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .unwrap_or(0);
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let cross = |u: &[f64], v: &[f64]| {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    };
    let mut e1 = cross(c, &a);
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= n1);
    let e2 = cross(c, &e1);
    (e1, e2)
}

/// Draw from the density `∝ exp(−‖y − center‖₂/σ)` on `R^dim`: a uniform
/// direction (normalized Gaussian) times a `Gamma(dim, 1)` radius times σ.
pub fn sample_euclidean_laplace<R: Rng + ?Sized>(
    center: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if center.is_empty() {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Domain(format!("scale {sigma} must be non-negative")));
    }
    if sigma == 0.0 {
        return Ok(center.to_vec());
    }
    let dim = center.len();
    let gamma = Gamma::new(dim as f64, 1.0)
        .map_err(|e| Error::Domain(format!("gamma radius law: {e}")))?;
    let direction = loop {
        let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            break z.into_iter().map(|x| x / n).collect::<Vec<f64>>();
        }
    };
    let radius = gamma.sample(rng) * sigma;
    Ok(center
        .iter()
        .zip(direction)
        .map(|(c, u)| c + radius * u)
        .collect())
}

fn draw_proposal<R: Rng + ?Sized>(x: &Point, sigma: f64, rng: &mut R) -> Result<TangentVector> {
    match x.manifold().kind() {
        ManifoldKind::Sphere => sphere::draw_tangent_proposal(x, sigma, rng),
        ManifoldKind::Spdm => spdm::draw_tangent_proposal(x, sigma, rng),
    }
}

/// Random-walk Metropolis-Hastings chain targeting `∝ exp(−ρ(η, x)/σ)`.
///
/// Proposals have length σ in the tangent space of the current state and
/// are pushed to the manifold with the exponential map. The chain starts
/// at η.
#[derive(Debug, Clone)]
pub struct LaplaceChain {
    eta: Point,
    sigma: f64,
    state: Point,
    state_distance: f64,
    burn_in: usize,
    thinning: usize,
    ball: Option<BallSpec>,
    steps: usize,
    accepted_total: usize,
    window_steps: usize,
    window_accepted: usize,
    burned_in: bool,
}

impl LaplaceChain {
    /// `ball` restricts released samples to that ball (thinned samples
    /// outside it are discarded and the chain keeps running).
    pub fn new(
        eta: Point,
        sigma: f64,
        burn_in: usize,
        thinning: usize,
        ball: Option<BallSpec>,
    ) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain(format!("rate {sigma} must be positive")));
        }
        if thinning < 1 {
            return Err(Error::Domain("thinning must be at least 1".into()));
        }
        if let Some(b) = &ball {
            if b.manifold() != eta.manifold() {
                return Err(Error::ManifoldMismatch);
            }
        }
        Ok(Self {
            state: eta.clone(),
            eta,
            sigma,
            state_distance: 0.0,
            burn_in,
            thinning,
            ball,
            steps: 0,
            accepted_total: 0,
            window_steps: 0,
            window_accepted: 0,
            burned_in: false,
        })
    }

    pub fn state(&self) -> &Point {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted_total as f64 / self.steps as f64
        }
    }

    /// One Metropolis-Hastings transition.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let v = draw_proposal(&self.state, self.sigma, rng)?;
        let candidate = exp(&v);
        let d = distance(&self.eta, &candidate)?;
        let log_ratio = (self.state_distance - d) / self.sigma;
        let accept = log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp();
        if accept {
            self.state = candidate;
            self.state_distance = d;
            self.accepted_total += 1;
            self.window_accepted += 1;
        }
        self.steps += 1;
        self.window_steps += 1;
        if self.window_steps == MIXING_WINDOW {
            let rate = self.window_accepted as f64 / MIXING_WINDOW as f64;
            if rate < MIN_ACCEPTANCE_RATE {
                return Err(Error::MixingFailure {
                    accepted: self.window_accepted,
                    window: MIXING_WINDOW,
                    steps: self.steps,
                    sigma: self.sigma,
                });
            }
            self.window_steps = 0;
            self.window_accepted = 0;
        }
        Ok(())
    }

    /// The next retained sample: the state after the burn-in on the first
    /// call, then every `thinning` steps. With a ball attached, samples
    /// outside it are skipped.
    pub fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Point> {
        let mut first = !self.burned_in;
        for _ in 0..=MAX_CONDITIONED_REJECTIONS {
            let steps = if first { self.burn_in } else { self.thinning };
            for _ in 0..steps {
                self.step(rng)?;
            }
            first = false;
            self.burned_in = true;
            match &self.ball {
                Some(ball) if !ball.contains(&self.state)? => continue,
                _ => return Ok(self.state.clone()),
            }
        }
        Err(Error::SamplerStuck {
            attempts: MAX_CONDITIONED_REJECTIONS,
        })
    }
}

/// One draw from the Riemannian Laplace distribution with footpoint `eta`
/// and rate `sigma`, after `cfg.burn_in` steps. When `cfg.condition_on_ball`
/// is set, `ball` must be given and the draw is restricted to it.
pub fn sample_riemannian_laplace<R: Rng + ?Sized>(
    eta: &Point,
    sigma: f64,
    cfg: &MechanismConfig,
    ball: Option<&BallSpec>,
    rng: &mut R,
) -> Result<Point> {
    let ball = if cfg.condition_on_ball {
        Some(
            ball.cloned()
                .ok_or_else(|| Error::Domain("conditioned sampling needs a ball".into()))?,
        )
    } else {
        None
    };
    LaplaceChain::new(eta.clone(), sigma, cfg.burn_in, cfg.thinning, ball)?.next_sample(rng)
}

/// Sensitivity and noise rate for a dataset of size `n` in `ball`.
pub fn calibrate(n: usize, ball: &BallSpec, cfg: &MechanismConfig) -> Result<Audit> {
    cfg.validate()?;
    let m = ball.manifold();
    let r = ball.radius();
    let kappa = m.kappa_upper();
    let h = curvature_factor(r, kappa)?;
    let delta = match cfg.sensitivity_source {
        SensitivitySource::Theoretical => sensitivity(n, r, kappa)?,
        SensitivitySource::Empirical { grid_n } => {
            if n < 1 {
                return Err(Error::Domain("sample size must be at least 1".into()));
            }
            tangent_bound_empirical(ball, grid_n)? / (n as f64 * h)
        }
    };
    Ok(Audit {
        n,
        r,
        kappa,
        h,
        delta,
        epsilon: cfg.epsilon,
        sigma: cfg.scale_rule.sigma(delta, cfg.epsilon),
        sensitivity_source: cfg.sensitivity_source.label(),
        conditioned: cfg.condition_on_ball,
        caveat: MCMC_CAVEAT.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivateRelease {
    pub point: Point,
    pub audit: Audit,
}

/// Intrinsic release for a mean that has already been computed.
pub fn release_intrinsic<R: Rng + ?Sized>(
    mean: &Point,
    n: usize,
    ball: &BallSpec,
    cfg: &MechanismConfig,
    rng: &mut R,
) -> Result<PrivateRelease> {
    let audit = calibrate(n, ball, cfg)?;
    let point = sample_riemannian_laplace(mean, audit.sigma, cfg, Some(ball), rng)?;
    Ok(PrivateRelease { point, audit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivateMean {
    pub release: PrivateRelease,
    pub mean: MeanResult,
}

/// Fréchet mean of `data`, privatized with the intrinsic Laplace mechanism.
pub fn privatize_frechet_mean<R: Rng + ?Sized>(
    data: &Dataset,
    cfg: &MechanismConfig,
    solver: &MeanSolverOptions,
    rng: &mut R,
) -> Result<PrivateMean> {
    let mean = frechet_mean(data, solver)?;
    let release = release_intrinsic(&mean.point, data.len(), data.ball(), cfg, rng)?;
    Ok(PrivateMean { release, mean })
}

/// Radius of the smallest Euclidean ball around the embedded center that
/// contains the geodesic ball.
pub fn ambient_ball_radius(ball: &BallSpec) -> Result<f64> {
    let m = ball.manifold();
    match m.kind() {
        ManifoldKind::Sphere => {
            let scale = m.length_scale();
            Ok(sphere::chord_radius(ball.radius() / scale)? * scale)
        }
        ManifoldKind::Spdm => spdm::ambient_radius(ball.radius()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EuclideanRelease {
    /// Perturbed embedding: `R^(d+1)` for spheres, vech for matrices.
    pub ambient: Vec<f64>,
    /// Whether the perturbed vector is again a point of the manifold.
    pub on_manifold: bool,
    pub ambient_radius: f64,
    pub delta: f64,
    pub sigma: f64,
}

/// Ambient baseline for an already computed mean. Uses the flat-space
/// sensitivity `Δ_E = 2 r_E / n` of the ambient ball radius `r_E`.
pub fn release_euclidean<R: Rng + ?Sized>(
    mean: &Point,
    n: usize,
    ball: &BallSpec,
    cfg: &MechanismConfig,
    rng: &mut R,
) -> Result<EuclideanRelease> {
    cfg.validate()?;
    if n < 1 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let r_e = ambient_ball_radius(ball)?;
    let delta = 2.0 * r_e / n as f64;
    let sigma = cfg.scale_rule.sigma(delta, cfg.epsilon);
    let ambient = sample_euclidean_laplace(&mean.embedding(), sigma, rng)?;
    let on_manifold = embedding_on_manifold(mean.manifold(), &ambient);
    Ok(EuclideanRelease {
        ambient,
        on_manifold,
        ambient_radius: r_e,
        delta,
        sigma,
    })
}

/// Whether an ambient vector is the embedding of a manifold point.
pub fn embedding_on_manifold(m: &ManifoldDescriptor, ambient: &[f64]) -> bool {
    match m.kind() {
        ManifoldKind::Sphere => {
            let norm = ambient.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm - 1.0).abs() <= crate::geometry::POINT_TOL
        }
        ManifoldKind::Spdm => spdm::unvech(ambient).is_ok_and(|m| spdm::is_spd(&m)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineMean {
    pub release: EuclideanRelease,
    pub mean: MeanResult,
}

pub fn privatize_euclidean_baseline<R: Rng + ?Sized>(
    data: &Dataset,
    cfg: &MechanismConfig,
    solver: &MeanSolverOptions,
    rng: &mut R,
) -> Result<BaselineMean> {
    let mean = frechet_mean(data, solver)?;
    let release = release_euclidean(&mean.point, data.len(), data.ball(), cfg, rng)?;
    Ok(BaselineMean { release, mean })
}

/// Monte Carlo estimate of `E‖P Y − c‖²` where `Y` is the Euclidean Laplace
/// on `R^ambient_dim` with scale σ and `P` keeps the first `dim`
/// coordinates. The exact value is `σ² dim (ambient_dim + 1)`.
pub fn project_subspace_noise<R: Rng + ?Sized>(
    dim: usize,
    ambient_dim: usize,
    sigma: f64,
    n_draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if dim < 1 || dim > ambient_dim {
        return Err(Error::Domain(format!(
            "need 1 <= d <= D, got d = {dim}, D = {ambient_dim}"
        )));
    }
    if n_draws < 1 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    let center = vec![0.0; ambient_dim];
    let mut total = 0.0;
    for _ in 0..n_draws {
        let y = sample_euclidean_laplace(&center, sigma, rng)?;
        total += y[..dim].iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total / n_draws as f64)
}
