//! Manifold descriptors, points, tangent vectors and the operations every
//! geometry has to provide.
//!
//! Points carry their [`ManifoldDescriptor`], so the free functions in this
//! module ([`distance`], [`exp`], [`log`], [`metric_inner`]) dispatch to the
//! concrete implementations in [`crate::sphere`] and [`crate::spdm`].
//!
//! Spheres are stored as unit vectors in `R^(d+1)` whatever their curvature.
//! A sphere of curvature `kappa` is the unit sphere with every length scaled
//! by `kappa^(-1/2)`: exp and log act on the same ambient coordinates, while
//! the metric, tangent norms and distances pick up the scale factor.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{spdm, sphere};

/// Tolerance the stored coordinates satisfy after construction.
pub const POINT_TOL: f64 = 1e-10;
/// Inputs within this distance of a valid point are repaired rather than rejected.
pub const REPAIR_TOL: f64 = 1e-8;
/// Smallest eigenvalue accepted for a symmetric positive-definite matrix.
pub const SPD_EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Sphere,
    Spdm,
}

/// Which manifold a point lives on, with the curvature data the sensitivity
/// bound consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldDescriptor {
    kind: ManifoldKind,
    /// Sphere: intrinsic dimension d. Spdm: matrix order k.
    size: usize,
    /// Sphere: constant curvature. Spdm: 0, an upper bound on its curvatures.
    kappa: f64,
}

impl ManifoldDescriptor {
    /// The unit sphere `S^d` in `R^(d+1)`.
    pub fn sphere(d: usize) -> Result<Self> {
        Self::sphere_with_curvature(d, 1.0)
    }

    pub fn sphere_with_curvature(d: usize, kappa: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain("sphere dimension must be at least 1".into()));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Domain(format!(
                "sphere curvature must be positive, got {kappa}"
            )));
        }
        Ok(Self {
            kind: ManifoldKind::Sphere,
            size: d,
            kappa,
        })
    }

    /// `P(k)`, the k×k symmetric positive-definite matrices with the
    /// affine-invariant metric.
    pub fn spdm(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain("SPD matrix order must be at least 2".into()));
        }
        Ok(Self {
            kind: ManifoldKind::Spdm,
            size: k,
            kappa: 0.0,
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Intrinsic dimension: d for `S^d`, k(k+1)/2 for `P(k)`.
    pub fn dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere => self.size,
            ManifoldKind::Spdm => self.size * (self.size + 1) / 2,
        }
    }

    /// Matrix order k for SPD matrices.
    pub fn matrix_order(&self) -> Option<usize> {
        match self.kind {
            ManifoldKind::Sphere => None,
            ManifoldKind::Spdm => Some(self.size),
        }
    }

    /// Number of stored coordinates: d+1 for the sphere, k² for matrices.
    pub fn coord_len(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere => self.size + 1,
            ManifoldKind::Spdm => self.size * self.size,
        }
    }

    /// Length of the Euclidean embedding used by the ambient baseline:
    /// d+1 for the sphere, k(k+1)/2 (vech) for matrices.
    pub fn embedding_len(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere => self.size + 1,
            ManifoldKind::Spdm => self.dim(),
        }
    }

    pub fn kappa_upper(&self) -> f64 {
        self.kappa
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => PI / self.kappa.sqrt(),
            ManifoldKind::Spdm => f64::INFINITY,
        }
    }

    /// Largest admissible data-ball radius, `½ min(inj, (π/2) κ^(-1/2))`.
    pub fn r_star(&self) -> f64 {
        let curvature_cap = if self.kappa > 0.0 {
            0.5 * PI / self.kappa.sqrt()
        } else {
            f64::INFINITY
        };
        0.5 * self.injectivity_radius().min(curvature_cap)
    }

    /// Metric scale relative to the stored unit-sphere coordinates.
    pub(crate) fn length_scale(&self) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => 1.0 / self.kappa.sqrt(),
            ManifoldKind::Spdm => 1.0,
        }
    }
}

/// A point on a manifold.
///
/// Sphere points are unit vectors; SPD points are k×k matrices stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    manifold: ManifoldDescriptor,
    coords: Vec<f64>,
}

impl Point {
    /// Validates `coords` against the manifold. Sphere inputs whose norm is
    /// within [`REPAIR_TOL`] of one are renormalized; nearly symmetric matrix
    /// inputs are symmetrized. Anything further off is rejected.
    pub fn new(manifold: ManifoldDescriptor, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != manifold.coord_len() {
            return Err(Error::Shape(format!(
                "expected {} coordinates, got {}",
                manifold.coord_len(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        match manifold.kind {
            ManifoldKind::Sphere => {
                let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > REPAIR_TOL {
                    return Err(Error::InvalidPoint(format!(
                        "sphere point has norm {norm}"
                    )));
                }
                let coords = if (norm - 1.0).abs() <= POINT_TOL {
                    coords
                } else {
                    coords.into_iter().map(|c| c / norm).collect()
                };
                Ok(Self { manifold, coords })
            }
            ManifoldKind::Spdm => {
                let k = manifold.size;
                let m = DMatrix::from_row_slice(k, k, &coords);
                let asym = (&m - m.transpose()).norm();
                if asym > REPAIR_TOL {
                    return Err(Error::InvalidPoint(format!(
                        "matrix is not symmetric (asymmetry {asym:e})"
                    )));
                }
                let m = spdm::symmetrize(&m);
                let min_eig = spdm::SymEigen::new(&m).min_eigenvalue();
                if min_eig <= SPD_EIGEN_FLOOR {
                    return Err(Error::InvalidPoint(format!(
                        "matrix is not positive definite (min eigenvalue {min_eig:e})"
                    )));
                }
                Ok(Self {
                    manifold,
                    coords: row_major(&m),
                })
            }
        }
    }

    /// Unit-sphere point from ambient coordinates.
    pub fn sphere(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Shape("sphere points need at least 2 coordinates".into()));
        }
        Self::new(ManifoldDescriptor::sphere(coords.len() - 1)?, coords)
    }

    /// SPD point from a square matrix.
    pub fn spdm(matrix: &DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("SPD point must be a square matrix".into()));
        }
        Self::new(ManifoldDescriptor::spdm(matrix.nrows())?, row_major(matrix))
    }

    /// `(0, …, 0, 1)` on `S^d`.
    pub fn north_pole(d: usize) -> Result<Self> {
        let mut coords = vec![0.0; d + 1];
        coords[d] = 1.0;
        Self::sphere(coords)
    }

    /// The k×k identity.
    pub fn identity(k: usize) -> Result<Self> {
        Self::spdm(&DMatrix::identity(k, k))
    }

    /// Skips validation; callers guarantee the invariants hold.
    pub(crate) fn from_raw(manifold: ManifoldDescriptor, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), manifold.coord_len());
        Self { manifold, coords }
    }

    pub fn manifold(&self) -> &ManifoldDescriptor {
        &self.manifold
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coords)
    }

    /// Square matrix view of an SPD point. For sphere points this is a
    /// single column.
    pub fn as_matrix(&self) -> DMatrix<f64> {
        match self.manifold.kind {
            ManifoldKind::Sphere => DMatrix::from_column_slice(self.coords.len(), 1, &self.coords),
            ManifoldKind::Spdm => {
                let k = self.manifold.size;
                DMatrix::from_row_slice(k, k, &self.coords)
            }
        }
    }

    /// Coordinates in the Euclidean space the baseline mechanism works in:
    /// ambient `R^(d+1)` for spheres, `vech` for matrices.
    pub fn embedding(&self) -> Vec<f64> {
        match self.manifold.kind {
            ManifoldKind::Sphere => self.coords.clone(),
            ManifoldKind::Spdm => spdm::vech(&self.as_matrix()),
        }
    }

    /// True when both points share a manifold and agree coordinate-wise to
    /// [`POINT_TOL`].
    pub fn approx_eq(&self, other: &Point) -> bool {
        self.manifold == other.manifold
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| (a - b).abs() <= POINT_TOL)
    }
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// An element of the tangent space at `footpoint`, in the same ambient
/// coordinates as the footpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    footpoint: Point,
    coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(footpoint: Point, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != footpoint.coords.len() {
            return Err(Error::Shape(format!(
                "tangent has {} coordinates, footpoint has {}",
                coords.len(),
                footpoint.coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTangent("non-finite coordinate".into()));
        }
        match footpoint.manifold.kind {
            ManifoldKind::Sphere => {
                let normal = dot(&coords, &footpoint.coords);
                if normal.abs() > REPAIR_TOL {
                    return Err(Error::InvalidTangent(format!(
                        "normal component {normal:e} at footpoint"
                    )));
                }
                let coords = coords
                    .iter()
                    .zip(&footpoint.coords)
                    .map(|(v, p)| v - normal * p)
                    .collect();
                Ok(Self { footpoint, coords })
            }
            ManifoldKind::Spdm => {
                let k = footpoint.manifold.size;
                let m = DMatrix::from_row_slice(k, k, &coords);
                let asym = (&m - m.transpose()).norm();
                if asym > REPAIR_TOL {
                    return Err(Error::InvalidTangent(format!(
                        "matrix tangent is not symmetric (asymmetry {asym:e})"
                    )));
                }
                Ok(Self {
                    footpoint,
                    coords: row_major(&spdm::symmetrize(&m)),
                })
            }
        }
    }

    pub fn zero(footpoint: Point) -> Self {
        let coords = vec![0.0; footpoint.coords.len()];
        Self { footpoint, coords }
    }

    pub(crate) fn from_raw(footpoint: Point, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), footpoint.coords.len());
        Self { footpoint, coords }
    }

    pub fn footpoint(&self) -> &Point {
        &self.footpoint
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        match self.footpoint.manifold.kind {
            ManifoldKind::Sphere => DMatrix::from_column_slice(self.coords.len(), 1, &self.coords),
            ManifoldKind::Spdm => {
                let k = self.footpoint.manifold.size;
                DMatrix::from_row_slice(k, k, &self.coords)
            }
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            footpoint: self.footpoint.clone(),
            coords: self.coords.iter().map(|c| c * t).collect(),
        }
    }

    pub fn add(&self, other: &TangentVector) -> Result<Self> {
        self.check_footpoint(other)?;
        Ok(Self {
            footpoint: self.footpoint.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &TangentVector) -> Result<Self> {
        self.check_footpoint(other)?;
        Ok(Self {
            footpoint: self.footpoint.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        })
    }

    fn check_footpoint(&self, other: &TangentVector) -> Result<()> {
        if self.footpoint.approx_eq(&other.footpoint) {
            Ok(())
        } else {
            Err(Error::FootpointMismatch)
        }
    }
}

/// The data-ball certificate: every data point lies strictly within
/// `radius` of `center`, and `radius < r*`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec {
    center: Point,
    radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        let r_star = center.manifold.r_star();
        if radius >= r_star {
            return Err(Error::AssumptionViolation(format!(
                "ball radius {radius} is not below r* = {r_star}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn manifold(&self) -> &ManifoldDescriptor {
        &self.center.manifold
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        Ok(distance(&self.center, p)? < self.radius)
    }
}

pub fn in_ball(ball: &BallSpec, p: &Point) -> Result<bool> {
    ball.contains(p)
}

fn same_manifold(p: &Point, q: &Point) -> Result<()> {
    if p.manifold == q.manifold {
        Ok(())
    } else {
        Err(Error::ManifoldMismatch)
    }
}

/// Geodesic distance.
pub fn distance(p: &Point, q: &Point) -> Result<f64> {
    same_manifold(p, q)?;
    Ok(match p.manifold.kind {
        ManifoldKind::Sphere => sphere::sphere_distance(p, q),
        ManifoldKind::Spdm => spdm::spdm_distance(p, q),
    })
}

/// Exponential map at the footpoint of `v`.
pub fn exp(v: &TangentVector) -> Point {
    match v.footpoint.manifold.kind {
        ManifoldKind::Sphere => sphere::sphere_exp(v),
        ManifoldKind::Spdm => spdm::spdm_exp(v),
    }
}

/// Inverse exponential map: the tangent vector at `p` pointing to `q`.
pub fn log(p: &Point, q: &Point) -> Result<TangentVector> {
    same_manifold(p, q)?;
    match p.manifold.kind {
        ManifoldKind::Sphere => sphere::sphere_log(p, q),
        ManifoldKind::Spdm => Ok(spdm::spdm_log(p, q)),
    }
}

/// Riemannian inner product at a shared footpoint: the ambient dot product
/// (scaled by 1/κ) on spheres, `Tr(p⁻¹ v p⁻¹ w)` on SPD matrices.
pub fn metric_inner(v: &TangentVector, w: &TangentVector) -> Result<f64> {
    v.check_footpoint(w)?;
    Ok(match v.footpoint.manifold.kind {
        ManifoldKind::Sphere => dot(&v.coords, &w.coords) / v.footpoint.manifold.kappa,
        ManifoldKind::Spdm => spdm::affine_inner(&v.footpoint, &v.as_matrix(), &w.as_matrix()),
    })
}

pub fn tangent_norm(v: &TangentVector) -> f64 {
    match v.footpoint.manifold.kind {
        ManifoldKind::Sphere => {
            dot(&v.coords, &v.coords).sqrt() * v.footpoint.manifold.length_scale()
        }
        ManifoldKind::Spdm => {
            let m = v.as_matrix();
            spdm::affine_inner(&v.footpoint, &m, &m).max(0.0).sqrt()
        }
    }
}

/// The point a fraction `t` of the way along the minimizing geodesic from
/// `p` to `q`.
pub fn geodesic_point(p: &Point, q: &Point, t: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("geodesic parameter {t} outside [0, 1]")));
    }
    let v = log(p, q)?;
    Ok(exp(&v.scaled(t)))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean distance between two coordinate arrays.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRepr {
    manifold: ManifoldKind,
    coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let kappa = match self.manifold.kind {
            ManifoldKind::Sphere if self.manifold.kappa != 1.0 => Some(self.manifold.kappa),
            _ => None,
        };
        PointRepr {
            manifold: self.manifold.kind,
            coords: self.coords.clone(),
            kappa,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PointRepr::deserialize(deserializer)?;
        let n = repr.coords.len();
        let descriptor = match repr.manifold {
            ManifoldKind::Sphere => {
                if n < 2 {
                    return Err(D::Error::custom("sphere point needs at least 2 coordinates"));
                }
                ManifoldDescriptor::sphere_with_curvature(n - 1, repr.kappa.unwrap_or(1.0))
            }
            ManifoldKind::Spdm => {
                if repr.kappa.is_some() {
                    return Err(D::Error::custom("kappa is only meaningful for sphere points"));
                }
                let k = (n as f64).sqrt().round() as usize;
                if k * k != n {
                    return Err(D::Error::custom(format!(
                        "SPD point needs a square number of coordinates, got {n}"
                    )));
                }
                ManifoldDescriptor::spdm(k)
            }
        }
        .map_err(D::Error::custom)?;
        Point::new(descriptor, repr.coords).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8};

    fn diag(a: f64, b: f64) -> Point {
        Point::spdm(&DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b])).unwrap()
    }

    #[test]
    fn descriptors_report_r_star() {
        let s = ManifoldDescriptor::sphere(2).unwrap();
        assert_eq!(s.injectivity_radius(), PI);
        assert!((s.r_star() - PI / 4.0).abs() < 1e-15);
        assert_eq!(s.dim(), 2);

        let m = ManifoldDescriptor::spdm(2).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.kappa_upper(), 0.0);
        assert!(m.r_star().is_infinite());

        assert!(ManifoldDescriptor::sphere(0).is_err());
        assert!(ManifoldDescriptor::spdm(1).is_err());
        assert!(ManifoldDescriptor::sphere_with_curvature(2, 0.0).is_err());
    }

    #[test]
    fn point_construction_repairs_or_rejects() {
        let p = Point::sphere(vec![0.0, 0.0, 1.0 + 5e-9]).unwrap();
        assert!((p.coords()[2] - 1.0).abs() < 1e-15);
        assert!(Point::sphere(vec![0.0, 0.0, 1.1]).is_err());

        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5 + 1e-9, 0.5, 1.0]);
        let p = Point::spdm(&m).unwrap();
        assert_eq!(p.coords()[1], p.coords()[2]);

        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.5, 1.0]);
        assert!(Point::spdm(&asym).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(Point::spdm(&indefinite).is_err());
        let tiny = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-13]);
        assert!(Point::spdm(&tiny).is_err());
    }

    #[test]
    fn tangent_construction() {
        let north = Point::north_pole(2).unwrap();
        assert!(TangentVector::new(north.clone(), vec![1.0, 0.0, 0.0]).is_ok());
        assert!(TangentVector::new(north.clone(), vec![1.0, 0.0, 0.1]).is_err());
        let v = TangentVector::new(north, vec![1.0, 0.0, 1e-9]).unwrap();
        assert_eq!(v.coords()[2], 0.0);
    }

    #[test]
    fn metric_inner_examples() {
        let north = Point::north_pole(2).unwrap();
        let v = TangentVector::new(north, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(metric_inner(&v, &v).unwrap(), 1.0);

        let id = Point::identity(2).unwrap();
        let v = TangentVector::new(id, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((metric_inner(&v, &v).unwrap() - 2.0).abs() < 1e-14);

        // Tr(p⁻¹vp⁻¹v) with p = 2I, v = I: Tr(I/4) = 1/2.
        let p = diag(2.0, 2.0);
        let v = TangentVector::new(p, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((metric_inner(&v, &v).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn metric_inner_rejects_mismatched_footpoints() {
        let a = TangentVector::zero(Point::north_pole(2).unwrap());
        let b = TangentVector::zero(Point::sphere(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!(metric_inner(&a, &b), Err(Error::FootpointMismatch));
    }

    #[test]
    fn geodesic_point_examples() {
        let p = Point::north_pole(2).unwrap();
        let q = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(geodesic_point(&p, &q, 0.0).unwrap().approx_eq(&p));
        assert!(geodesic_point(&p, &q, 1.0).unwrap().approx_eq(&q));
        let mid = geodesic_point(&p, &q, 0.5).unwrap();
        let expected = Point::sphere(vec![FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).unwrap();
        assert!(mid.approx_eq(&expected));
        assert!(geodesic_point(&p, &q, 1.5).is_err());

        let south = Point::sphere(vec![0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            geodesic_point(&p, &south, 0.5),
            Err(Error::LogUndefined(_))
        ));
    }

    #[test]
    fn in_ball_examples() {
        let north = Point::north_pole(2).unwrap();
        let ball = BallSpec::new(north.clone(), FRAC_PI_8).unwrap();
        assert!(in_ball(&ball, &north).unwrap());
        let equator = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(!in_ball(&ball, &equator).unwrap());

        let ball = BallSpec::new(Point::identity(2).unwrap(), 1.5).unwrap();
        assert!(in_ball(&ball, &diag(E, E)).unwrap());

        assert!(BallSpec::new(north.clone(), FRAC_PI_2).is_err());
        assert!(BallSpec::new(north, 0.0).is_err());
    }

    #[test]
    fn distance_rejects_mixed_manifolds() {
        let a = Point::north_pole(2).unwrap();
        let b = Point::identity(2).unwrap();
        assert_eq!(distance(&a, &b), Err(Error::ManifoldMismatch));
    }

    #[test]
    fn curved_sphere_scales_lengths() {
        let s = ManifoldDescriptor::sphere_with_curvature(2, 4.0).unwrap();
        let p = Point::new(s, vec![0.0, 0.0, 1.0]).unwrap();
        let q = Point::new(s, vec![1.0, 0.0, 0.0]).unwrap();
        assert!((distance(&p, &q).unwrap() - PI / 4.0).abs() < 1e-14);
        assert!((tangent_norm(&log(&p, &q).unwrap()) - PI / 4.0).abs() < 1e-14);
        assert!((s.r_star() - PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn point_json_roundtrip() {
        let p = diag(2.0, 3.0);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"manifold":"spdm","coords":[2.0,0.0,0.0,3.0]}"#);
        let back: Point = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);

        let s: Point = serde_json::from_str(r#"{"manifold":"sphere","coords":[0,0,1]}"#).unwrap();
        assert_eq!(s, Point::north_pole(2).unwrap());

        assert!(serde_json::from_str::<Point>(r#"{"manifold":"spdm","coords":[1,0,0]}"#).is_err());
        assert!(serde_json::from_str::<Point>(r#"{"manifold":"sphere","coords":[0,0,2]}"#).is_err());
    }
}
