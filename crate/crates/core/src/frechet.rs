//! Fréchet mean by Riemannian gradient descent.
//!
//! The energy is `F(x) = 1/(2n) Σ ρ²(x, xᵢ)`; its negative gradient is the
//! mean of the log vectors `1/n Σ log_x(xᵢ)`. Each iteration moves
//! `μ_k = exp_{μ_{k−1}}(t · v_k)` and the loop stops once
//! `ρ(μ_k, μ_{k−1}) < tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, exp, log, tangent_norm, BallSpec, Point, TangentVector};

/// A sample of points on one manifold together with its data-ball
/// certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    points: Vec<Point>,
    #[serde(serialize_with = "ball_serde::serialize")]
    ball: BallSpec,
}

impl Dataset {
    pub fn new(points: Vec<Point>, ball: BallSpec) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (i, p) in points.iter().enumerate() {
            if p.manifold() != ball.manifold() {
                return Err(Error::ManifoldMismatch);
            }
            if !ball.contains(p)? {
                return Err(Error::AssumptionViolation(format!(
                    "data point {i} lies outside the certified ball"
                )));
            }
        }
        Ok(Self { points, ball })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The neighbouring dataset with record `index` replaced by `point`.
    pub fn with_replaced(&self, index: usize, point: Point) -> Result<Self> {
        if index >= self.points.len() {
            return Err(Error::Domain(format!(
                "record {index} out of range for a dataset of {}",
                self.points.len()
            )));
        }
        let mut points = self.points.clone();
        points[index] = point;
        Self::new(points, self.ball.clone())
    }
}

mod ball_serde {
    use super::BallSpec;
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(ball: &BallSpec, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BallSpec", 2)?;
        st.serialize_field("center", ball.center())?;
        st.serialize_field("radius", &ball.radius())?;
        st.end()
    }
}

/// JSON form of a dataset: `{"ball": {"center": Point, "radius": r}, "points": [Point]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRepr {
    ball: BallRepr,
    points: Vec<Point>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallRepr {
    center: Point,
    radius: f64,
}

impl<'de> Deserialize<'de> for Dataset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DatasetRepr::deserialize(d)?;
        let ball = BallSpec::new(repr.ball.center, repr.ball.radius).map_err(D::Error::custom)?;
        Dataset::new(repr.points, ball).map_err(D::Error::custom)
    }
}

/// Where the descent starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanInit {
    /// Start at the data point with this index.
    Index(usize),
    /// Start at the data point of lowest energy.
    Medoid,
    /// Start at the first data point.
    #[default]
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanSolverOptions {
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub init: MeanInit,
}

impl Default for MeanSolverOptions {
    fn default() -> Self {
        Self {
            step: 0.5,
            tol: 1e-5,
            max_iter: 500,
            init: MeanInit::First,
        }
    }
}

impl MeanSolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::Domain(format!("step {} outside (0, 1]", self.step)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanResult {
    pub point: Point,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the final descent direction.
    pub gradient_norm: f64,
}

/// `F(x) = 1/(2n) Σ ρ²(x, xᵢ)`.
pub fn energy(data: &Dataset, x: &Point) -> Result<f64> {
    let n = data.len() as f64;
    let mut total = 0.0;
    for p in data.points() {
        let d = distance(x, p)?;
        total += d * d;
    }
    Ok(total / (2.0 * n))
}

/// Descent direction `1/n Σ log_x(xᵢ)`, the negative Riemannian gradient of
/// the energy.
pub fn gradient_step_direction(data: &Dataset, x: &Point) -> Result<TangentVector> {
    let n = data.len() as f64;
    let mut acc = vec![0.0; x.coords().len()];
    for p in data.points() {
        let v = log(x, p)?;
        acc.iter_mut().zip(v.coords()).for_each(|(a, c)| *a += c);
    }
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(TangentVector::from_raw(x.clone(), acc))
}

pub fn frechet_mean(data: &Dataset, opts: &MeanSolverOptions) -> Result<MeanResult> {
    descend(data, opts, |_| {})
}

/// Like [`frechet_mean`], also returning the energy of every iterate
/// (starting with the initial point).
pub fn frechet_mean_traced(
    data: &Dataset,
    opts: &MeanSolverOptions,
) -> Result<(MeanResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let mut failure = None;
    let result = descend(data, opts, |p| match energy(data, p) {
        Ok(e) => trace.push(e),
        Err(e) => failure = Some(e),
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok((result, trace)),
    }
}

fn initial_point(data: &Dataset, init: MeanInit) -> Result<Point> {
    match init {
        MeanInit::First => Ok(data.points()[0].clone()),
        MeanInit::Index(i) => data
            .points()
            .get(i)
            .cloned()
            .ok_or_else(|| Error::Domain(format!("initial index {i} out of range"))),
        MeanInit::Medoid => {
            let mut best: Option<(f64, &Point)> = None;
            for p in data.points() {
                let e = energy(data, p)?;
                if best.is_none_or(|(b, _)| e < b) {
                    best = Some((e, p));
                }
            }
            Ok(best.map(|(_, p)| p.clone()).ok_or(Error::EmptyDataset)?)
        }
    }
}

fn descend(
    data: &Dataset,
    opts: &MeanSolverOptions,
    mut observe: impl FnMut(&Point),
) -> Result<MeanResult> {
    opts.validate()?;
    let mut current = initial_point(data, opts.init)?;
    observe(&current);
    if data.len() == 1 {
        return Ok(MeanResult {
            point: current,
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
        });
    }
    let mut gradient_norm = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        let direction = gradient_step_direction(data, &current)?;
        gradient_norm = tangent_norm(&direction);
        let next = exp(&direction.scaled(opts.step));
        let moved = distance(&current, &next)?;
        observe(&next);
        current = next;
        if moved < opts.tol {
            return Ok(MeanResult {
                point: current,
                iterations: iteration,
                converged: true,
                gradient_norm,
            });
        }
    }
    Ok(MeanResult {
        point: current,
        iterations: opts.max_iter,
        converged: false,
        gradient_norm,
    })
}
