//! Closed-form geometry of the sphere, the polar-cap data generator and the
//! tangent proposal of the Metropolis-Hastings sampler.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{dot, ManifoldDescriptor, ManifoldKind, Point, TangentVector};

/// Below this angle θ/sin θ is evaluated by its Taylor series.
const SMALL_ANGLE: f64 = 1e-6;
/// Points closer than this to the antipode have no unique log.
const ANTIPODAL_TOL: f64 = 1e-8;

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Returns `(θ, q − cos θ · p, sin θ)` for unit vectors `p`, `q`.
///
/// θ comes from `atan2(‖q − ⟨p,q⟩p‖, ⟨p,q⟩)`, which equals the clamped
/// `arccos⟨p,q⟩` but keeps full precision near 0 and π.
fn angle_parts(p: &[f64], q: &[f64]) -> (f64, Vec<f64>, f64) {
    if p == q {
        return (0.0, vec![0.0; p.len()], 0.0);
    }
    let c = dot(p, q).clamp(-1.0, 1.0);
    let w: Vec<f64> = q.iter().zip(p).map(|(qi, pi)| qi - c * pi).collect();
    let s = norm(&w);
    (s.atan2(c), w, s)
}

/// Great-circle distance, in `[0, π κ^(-1/2)]`.
pub fn sphere_distance(p: &Point, q: &Point) -> f64 {
    let (theta, _, _) = angle_parts(p.coords(), q.coords());
    theta * p.manifold().length_scale()
}

/// `exp_p(v) = cos‖v‖ p + sin‖v‖ v/‖v‖`, with `exp_p(0) = p`.
pub fn sphere_exp(v: &TangentVector) -> Point {
    let p = v.footpoint();
    let n = norm(v.coords());
    if n == 0.0 {
        return p.clone();
    }
    let (c, s) = (n.cos(), n.sin() / n);
    let mut out: Vec<f64> = p
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(pi, vi)| c * pi + s * vi)
        .collect();
    let len = norm(&out);
    out.iter_mut().for_each(|x| *x /= len);
    Point::from_raw(*p.manifold(), out)
}

/// `exp_p⁻¹(q) = θ/sin θ · (q − cos θ · p)`.
///
/// Returns the zero vector for `q = p` and an error for antipodal `q`.
pub fn sphere_log(p: &Point, q: &Point) -> Result<TangentVector> {
    let (theta, w, s) = angle_parts(p.coords(), q.coords());
    if PI - theta < ANTIPODAL_TOL {
        return Err(Error::LogUndefined(
            "points are antipodal on the sphere".into(),
        ));
    }
    let factor = if theta < SMALL_ANGLE {
        1.0 + theta * theta / 6.0
    } else {
        theta / s
    };
    let mut coords: Vec<f64> = w.into_iter().map(|wi| wi * factor).collect();
    // Remove the rounding-level normal component.
    let normal = dot(&coords, p.coords());
    coords
        .iter_mut()
        .zip(p.coords())
        .for_each(|(v, pi)| *v -= normal * pi);
    Ok(TangentVector::from_raw(p.clone(), coords))
}

/// Euclidean radius (chord length) of the geodesic cap of radius `r` on
/// the unit sphere: `2 sin(r/2)`.
pub fn chord_radius(r: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&r) {
        return Err(Error::Domain(format!("cap radius {r} outside [0, π]")));
    }
    Ok(2.0 * (r / 2.0).sin())
}

/// Draws a point of `S²` whose polar angle θ from the north pole is uniform
/// on `[0, r]` and whose azimuth φ is uniform on `[0, 2π)`.
///
/// The result concentrates towards the pole; it is not area-uniform on the
/// cap.
pub fn sample_polar_cap<R: Rng + ?Sized>(
    manifold: &ManifoldDescriptor,
    r: f64,
    rng: &mut R,
) -> Result<Point> {
    if manifold.kind() != ManifoldKind::Sphere || manifold.dim() != 2 {
        return Err(Error::Unsupported(
            "polar-cap sampling is only defined on S^2".into(),
        ));
    }
    if !(r > 0.0 && r <= PI) {
        return Err(Error::Domain(format!("cap radius {r} outside (0, π]")));
    }
    let theta = rng.random::<f64>() * r;
    let phi = rng.random::<f64>() * 2.0 * PI;
    Ok(polar_point(manifold, theta, phi))
}

/// `(sin θ cos φ, sin θ sin φ, cos θ)` on the given 2-sphere.
pub(crate) fn polar_point(manifold: &ManifoldDescriptor, theta: f64, phi: f64) -> Point {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Point::from_raw(*manifold, vec![st * cp, st * sp, ct])
}

/// Proposal for the random-walk sampler: a standard Gaussian vector in the
/// ambient space, rescaled to length `sigma`, then projected onto the
/// tangent space at `x`. The result has norm at most `sigma` and its law is
/// invariant under `v ↦ −v`.
pub fn draw_tangent_proposal<R: Rng + ?Sized>(
    x: &Point,
    sigma: f64,
    rng: &mut R,
) -> Result<TangentVector> {
    if x.manifold().kind() != ManifoldKind::Sphere {
        return Err(Error::Unsupported(
            "sphere proposal requested for a non-sphere point".into(),
        ));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("proposal length {sigma} must be positive")));
    }
    let len = sigma / x.manifold().length_scale();
    let p = x.coords();
    loop {
        let z: Vec<f64> = (0..p.len()).map(|_| rng.sample(StandardNormal)).collect();
        let zn = norm(&z);
        if zn == 0.0 {
            continue;
        }
        let z: Vec<f64> = z.into_iter().map(|zi| zi * len / zn).collect();
        let normal = dot(&z, p);
        let v: Vec<f64> = z.iter().zip(p).map(|(zi, pi)| zi - normal * pi).collect();
        if norm(&v) == 0.0 {
            continue;
        }
        return Ok(TangentVector::from_raw(x.clone(), v));
    }
}
