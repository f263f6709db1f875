use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    #[error("tangent vectors live at different footpoints")]
    FootpointMismatch,

    #[error("points belong to different manifolds")]
    ManifoldMismatch,

    #[error("inverse exponential map undefined: {0}")]
    LogUndefined(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("Wishart degrees of freedom {df} below matrix order {k}")]
    RankDeficient { df: usize, k: usize },

    #[error("ball sampler stuck after {attempts} consecutive rejections")]
    SamplerStuck { attempts: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error(
        "Metropolis-Hastings chain failed to mix: {accepted} of {window} proposals accepted \
         after {steps} steps (sigma = {sigma})"
    )]
    MixingFailure {
        accepted: usize,
        window: usize,
        steps: usize,
        sigma: f64,
    },

    #[error("empty dataset")]
    EmptyDataset,
}
