//! Symmetric positive-definite matrices under the affine-invariant metric
//! `⟨u, v⟩_p = Tr(p⁻¹ u p⁻¹ v)`.
//!
//! Every matrix function (Exp, Log, square roots) goes through a symmetric
//! eigendecomposition `Q f(Λ) Qᵀ`, so results are symmetric by construction.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{
    row_major, BallSpec, ManifoldDescriptor, ManifoldKind, Point, TangentVector, SPD_EIGEN_FLOOR,
};

/// Consecutive rejections after which the ball sampler gives up.
pub const MAX_BALL_REJECTIONS: usize = 1_000_000;

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(a.clone());
        let n = a.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    /// `Q f(Λ) Qᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= fl);
        }
        symmetrize(&(scaled * q.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|l| l)
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    SymEigen::new(a).map(f64::exp)
}

/// Principal matrix logarithm of an SPD matrix.
pub fn sym_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymEigen::new(a);
    if eig.min_eigenvalue() <= 0.0 {
        return Err(Error::InvalidPoint(
            "matrix logarithm needs positive eigenvalues".into(),
        ));
    }
    Ok(eig.map(f64::ln))
}

/// `true` if `m` is symmetric to 1e-10 and its smallest eigenvalue exceeds
/// the SPD floor.
pub fn is_spd(m: &DMatrix<f64>) -> bool {
    if !m.is_square() || m.iter().any(|x| !x.is_finite()) {
        return false;
    }
    if (m - m.transpose()).norm() > 1e-10 {
        return false;
    }
    SymEigen::new(&symmetrize(m)).min_eigenvalue() > SPD_EIGEN_FLOOR
}

/// `(p^{1/2}, p^{-1/2})`.
fn sqrt_pair(p: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = SymEigen::new(p);
    (eig.map(f64::sqrt), eig.map(|l| 1.0 / l.sqrt()))
}

/// `exp_p(v) = p^{1/2} Exp(p^{-1/2} v p^{-1/2}) p^{1/2}`.
pub fn spdm_exp(v: &TangentVector) -> Point {
    let p = v.footpoint();
    let (s, si) = sqrt_pair(&p.as_matrix());
    let inner = symmetrize(&(&si * v.as_matrix() * &si));
    let out = symmetrize(&(&s * sym_exp(&inner) * &s));
    Point::from_raw(*p.manifold(), row_major(&out))
}

/// `exp_q⁻¹(p) = q^{1/2} Log(q^{-1/2} p q^{-1/2}) q^{1/2}`.
pub fn spdm_log(q: &Point, p: &Point) -> TangentVector {
    let (s, si) = sqrt_pair(&q.as_matrix());
    let inner = symmetrize(&(&si * p.as_matrix() * &si));
    // Both inputs passed SPD validation, so the congruence is SPD too.
    let log_inner = SymEigen::new(&inner).map(|l| l.max(f64::MIN_POSITIVE).ln());
    let out = symmetrize(&(&s * log_inner * &s));
    TangentVector::from_raw(q.clone(), row_major(&out))
}

/// `ρ(q, p) = ‖Log(q^{-1/2} p q^{-1/2})‖_F = sqrt(Σ log² λᵢ(q⁻¹p))`.
pub fn spdm_distance(q: &Point, p: &Point) -> f64 {
    let (_, si) = sqrt_pair(&q.as_matrix());
    let inner = symmetrize(&(&si * p.as_matrix() * &si));
    SymEigen::new(&inner)
        .eigenvalues
        .iter()
        .map(|l| {
            let ll = l.max(f64::MIN_POSITIVE).ln();
            ll * ll
        })
        .sum::<f64>()
        .sqrt()
}

/// `Tr(p⁻¹ u p⁻¹ v)`.
pub(crate) fn affine_inner(p: &Point, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let p_inv = SymEigen::new(&p.as_matrix()).map(|l| 1.0 / l);
    (&p_inv * u * &p_inv * v).trace()
}

/// Half-vectorization: the lower triangle stacked column by column, without
/// any weighting of the off-diagonal entries.
pub fn vech(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for i in j..k {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vech`]; fails unless `x.len()` is a triangular number.
pub fn unvech(x: &[f64]) -> Result<DMatrix<f64>> {
    let k = (((8 * x.len() + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    if k == 0 || k * (k + 1) / 2 != x.len() {
        return Err(Error::Shape(format!(
            "{} is not a half-vectorization length k(k+1)/2",
            x.len()
        )));
    }
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            m[(i, j)] = x[idx];
            m[(j, i)] = x[idx];
            idx += 1;
        }
    }
    Ok(m)
}

/// Frobenius radius of the smallest ball around `I` containing the geodesic
/// ball `B_r(I)`: `e^r − 1`.
pub fn ambient_radius(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} must be non-negative")));
    }
    Ok(r.exp_m1())
}

/// One draw from the Wishart distribution `W(I_k / k, df)` built as
/// `Σ zᵢ zᵢᵀ` over `df` Gaussian vectors with covariance `I_k / k`.
pub fn wishart_sample<R: Rng + ?Sized>(k: usize, df: usize, rng: &mut R) -> Result<Point> {
    let manifold = ManifoldDescriptor::spdm(k)?;
    if df < k {
        return Err(Error::RankDeficient { df, k });
    }
    let scale = (1.0 / k as f64).sqrt();
    loop {
        let mut acc = DMatrix::<f64>::zeros(k, k);
        for _ in 0..df {
            let z: Vec<f64> = (0..k)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            for i in 0..k {
                for j in 0..k {
                    acc[(i, j)] += z[i] * z[j];
                }
            }
        }
        // Singular draws have probability zero but can appear numerically.
        if SymEigen::new(&acc).min_eigenvalue() > SPD_EIGEN_FLOOR {
            return Ok(Point::from_raw(manifold, row_major(&acc)));
        }
    }
}

/// Wishart draw conditioned on landing in `ball`, by rejection. The ball
/// must be centered at the identity.
pub fn sample_ball_wishart<R: Rng + ?Sized>(
    ball: &BallSpec,
    df: usize,
    rng: &mut R,
) -> Result<Point> {
    let (point, _) = sample_ball_wishart_counted(ball, df, rng)?;
    Ok(point)
}

/// As [`sample_ball_wishart`], also returning how many draws were needed.
pub fn sample_ball_wishart_counted<R: Rng + ?Sized>(
    ball: &BallSpec,
    df: usize,
    rng: &mut R,
) -> Result<(Point, usize)> {
    let k = ball.manifold().matrix_order().ok_or_else(|| {
        Error::Unsupported("Wishart ball sampling needs an SPD ball".into())
    })?;
    let identity = Point::identity(k)?;
    if !ball.center().approx_eq(&identity) {
        return Err(Error::Domain(
            "Wishart ball sampling requires a ball centered at the identity".into(),
        ));
    }
    for attempt in 1..=MAX_BALL_REJECTIONS {
        let x = wishart_sample(k, df, rng)?;
        if spdm_distance(&identity, &x) < ball.radius() {
            return Ok((x, attempt));
        }
    }
    Err(Error::SamplerStuck {
        attempts: MAX_BALL_REJECTIONS,
    })
}

/// Random-walk proposal on `P(k)`: a standard Gaussian in an orthonormal
/// frame of `T_x`, rescaled to metric length exactly `sigma`. The frame is
/// `x^{1/2} E x^{1/2}` for a Frobenius-orthonormal basis `E` of symmetric
/// matrices, so the law is invariant under `v ↦ −v` and under congruence.
pub fn draw_tangent_proposal<R: Rng + ?Sized>(
    x: &Point,
    sigma: f64,
    rng: &mut R,
) -> Result<TangentVector> {
    let k = match x.manifold().kind() {
        ManifoldKind::Spdm => x.manifold().matrix_order().unwrap_or(0),
        ManifoldKind::Sphere => {
            return Err(Error::Unsupported(
                "SPD proposal requested for a sphere point".into(),
            ))
        }
    };
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("proposal length {sigma} must be positive")));
    }
    let (s, _) = sqrt_pair(&x.as_matrix());
    loop {
        let mut e = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            e[(i, i)] = rng.sample(StandardNormal);
            for j in (i + 1)..k {
                let g: f64 = rng.sample(StandardNormal);
                e[(i, j)] = g * std::f64::consts::FRAC_1_SQRT_2;
                e[(j, i)] = e[(i, j)];
            }
        }
        let en = e.norm();
        if en == 0.0 {
            continue;
        }
        e *= sigma / en;
        let v = symmetrize(&(&s * e * &s));
        return Ok(TangentVector::from_raw(x.clone(), row_major(&v)));
    }
}
