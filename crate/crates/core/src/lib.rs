//! Differentially private Fréchet means on Riemannian manifolds.
//!
//! The crate provides two concrete geometries, the unit sphere ([`sphere`])
//! and symmetric positive-definite matrices with the affine-invariant metric
//! ([`spdm`]), a gradient-descent Fréchet mean solver ([`frechet`]), and the
//! intrinsic Laplace mechanism together with a Euclidean ambient-space
//! baseline ([`mechanism`]).
//!
//! Intrinsic releases are sampled by Metropolis-Hastings. They are meant for
//! experimentation: the ε guarantee is exact only for exact Laplace draws.

pub mod error;
pub mod frechet;
pub mod geometry;
pub mod mechanism;
pub mod spdm;
pub mod sphere;

pub use error::{Error, Result};
pub use frechet::{
    energy, frechet_mean, frechet_mean_traced, gradient_step_direction, Dataset, MeanInit,
    MeanResult, MeanSolverOptions,
};
pub use geometry::{
    distance, euclidean_distance, exp, geodesic_point, in_ball, log, metric_inner, tangent_norm,
    BallSpec, ManifoldDescriptor, ManifoldKind, Point, TangentVector,
};
pub use mechanism::{
    calibrate, curvature_factor, privatize_euclidean_baseline, privatize_frechet_mean,
    project_subspace_noise, release_euclidean, release_intrinsic, sample_euclidean_laplace,
    sample_riemannian_laplace, sensitivity, tangent_bound_empirical, tangent_bound_theoretical,
    Audit, LaplaceChain, MechanismConfig, ScaleRule, SensitivitySource,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
