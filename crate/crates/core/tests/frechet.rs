use std::f64::consts::{FRAC_PI_8, PI};

use manifold_dp::frechet::{energy, frechet_mean, frechet_mean_traced, Dataset, MeanInit, MeanSolverOptions};
use manifold_dp::geometry::{distance, BallSpec, ManifoldDescriptor, Point};
use manifold_dp::spdm::sample_ball_wishart;
use manifold_dp::sphere::sample_polar_cap;
use nalgebra::{DMatrix, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s2() -> ManifoldDescriptor {
    ManifoldDescriptor::sphere(2).unwrap()
}

fn sphere_ball() -> BallSpec {
    BallSpec::new(Point::north_pole(2).unwrap(), FRAC_PI_8).unwrap()
}

fn spd_ball() -> BallSpec {
    BallSpec::new(Point::identity(2).unwrap(), 1.5).unwrap()
}

fn cap_dataset(n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let pts = (0..n).map(|_| sample_polar_cap(&s2(), FRAC_PI_8, rng).unwrap()).collect();
    Dataset::new(pts, sphere_ball()).unwrap()
}

fn wishart_dataset(n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let ball = spd_ball();
    let pts = (0..n).map(|_| sample_ball_wishart(&ball, 2, rng).unwrap()).collect();
    Dataset::new(pts, ball).unwrap()
}

fn polar(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Energy evaluated straight from arccos of ambient dot products.
fn direct_energy(data: &[[f64; 3]], x: [f64; 3]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|p| {
            let c = (p[0] * x[0] + p[1] * x[1] + p[2] * x[2]).clamp(-1.0, 1.0);
            c.acos().powi(2)
        })
        .sum();
    total / (2.0 * data.len() as f64)
}

/// Minimizes over a `g × g` grid on `[t0, t1] × [p0, p1]`.
fn grid_argmin(data: &[[f64; 3]], (t0, t1): (f64, f64), (p0, p1): (f64, f64), g: usize) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..g {
        let t = t0 + (t1 - t0) * i as f64 / (g - 1) as f64;
        for j in 0..g {
            let p = p0 + (p1 - p0) * j as f64 / (g - 1) as f64;
            let e = direct_energy(data, polar(t, p));
            if e < best.0 {
                best = (e, t, p);
            }
        }
    }
    (best.1, best.2)
}

#[test]
fn sphere_mean_matches_brute_force_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let data = cap_dataset(5, &mut rng);
    let raw: Vec<[f64; 3]> = data
        .points()
        .iter()
        .map(|p| [p.coords()[0], p.coords()[1], p.coords()[2]])
        .collect();

    let g = 400;
    let (dt, dp) = (FRAC_PI_8 / (g - 1) as f64, 2.0 * PI / (g - 1) as f64);
    let (t, p) = grid_argmin(&raw, (0.0, FRAC_PI_8), (0.0, 2.0 * PI), g);
    let (t0, t1) = ((t - dt).max(0.0), t + dt);
    let (t, p) = grid_argmin(&raw, (t0, t1), (p - dp, p + dp), g);
    let fine_t = (t1 - t0) / (g - 1) as f64;
    let fine_p = 2.0 * dp / (g - 1) as f64;
    let resolution = (fine_t.powi(2) + (t.sin() * fine_p).powi(2)).sqrt();

    let oracle = Point::sphere(polar(t, p).to_vec()).unwrap();
    let opts = MeanSolverOptions::default();
    let mean = frechet_mean(&data, &opts).unwrap();
    assert!(mean.converged);
    let gap = distance(&mean.point, &oracle).unwrap();
    assert!(gap <= resolution + opts.tol, "gap {gap}, resolution {resolution}");
}

#[test]
fn two_point_means_are_geodesic_midpoints() {
    let opts = MeanSolverOptions::default();

    let p = Point::sphere(polar(0.1, 0.3).to_vec()).unwrap();
    let q = Point::sphere(polar(0.35, 2.0).to_vec()).unwrap();
    let data = Dataset::new(vec![p.clone(), q.clone()], sphere_ball()).unwrap();
    let sum: Vec<f64> = p.coords().iter().zip(q.coords()).map(|(a, b)| a + b).collect();
    let n = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mid = Point::sphere(sum.iter().map(|x| x / n).collect()).unwrap();
    let mean = frechet_mean(&data, &opts).unwrap().point;
    assert!(distance(&mean, &mid).unwrap() < 1e-5);

    // Closed-form 2×2 geometric mean.
    let a = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
    let b = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, -0.4, -0.4, 1.5]);
    let (da, db) = (a.determinant().sqrt(), b.determinant().sqrt());
    let m = &a * db + &b * da;
    let g = &m * ((da * db).sqrt() / m.determinant().sqrt());
    let pa = Point::spdm(&a).unwrap();
    let pb = Point::spdm(&b).unwrap();
    let data = Dataset::new(vec![pa, pb], spd_ball()).unwrap();
    let mean = frechet_mean(&data, &opts).unwrap().point;
    assert!(distance(&mean, &Point::spdm(&g).unwrap()).unwrap() < 1e-5);
}

#[test]
fn descent_is_monotone_and_converges_on_random_datasets() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let opts = MeanSolverOptions::default();
    let mut longest = 0;
    for i in 0..100 {
        let n = rng.random_range(20..=200);
        let data = if i % 2 == 0 {
            cap_dataset(n, &mut rng)
        } else {
            wishart_dataset(n, &mut rng)
        };
        let (res, trace) = frechet_mean_traced(&data, &opts).unwrap();
        assert!(res.converged && res.iterations < 500);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "energy rose from {} to {}", w[0], w[1]);
        }
        longest = longest.max(res.iterations);
    }
    println!("longest run: {longest} iterations");
}

#[test]
fn mean_minimizes_energy_against_random_candidates() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let data = cap_dataset(30, &mut rng);
    let mean = frechet_mean(&data, &MeanSolverOptions::default()).unwrap().point;
    let best = energy(&data, &mean).unwrap();
    for _ in 0..1000 {
        let x = sample_polar_cap(&s2(), FRAC_PI_8, &mut rng).unwrap();
        assert!(best <= energy(&data, &x).unwrap());
    }
}

#[test]
fn mean_is_rotation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let data = cap_dataset(25, &mut rng);
    let rot = Rotation3::from_euler_angles(0.4, -1.1, 2.3);
    let turn = |p: &Point| {
        let v = rot * Vector3::from_column_slice(p.coords());
        Point::sphere(v.as_slice().to_vec()).unwrap()
    };
    let ball = BallSpec::new(turn(data.ball().center()), FRAC_PI_8).unwrap();
    let rotated = Dataset::new(data.points().iter().map(turn).collect(), ball).unwrap();
    let opts = MeanSolverOptions::default();
    let a = turn(&frechet_mean(&data, &opts).unwrap().point);
    let b = frechet_mean(&rotated, &opts).unwrap().point;
    assert!(distance(&a, &b).unwrap() < 1e-6);
}

#[test]
fn mean_is_congruence_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let data = wishart_dataset(25, &mut rng);
    let g = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, -0.2, 0.8]);
    let act = |p: &Point| {
        let m = &g * p.as_matrix() * g.transpose();
        Point::spdm(&((&m + m.transpose()) * 0.5)).unwrap()
    };
    let ball = BallSpec::new(act(data.ball().center()), 1.5).unwrap();
    let moved = Dataset::new(data.points().iter().map(act).collect(), ball).unwrap();
    let opts = MeanSolverOptions::default();
    let a = act(&frechet_mean(&data, &opts).unwrap().point);
    let b = frechet_mean(&moved, &opts).unwrap().point;
    assert!(distance(&a, &b).unwrap() < 1e-6);
}

/// The minimizer is unique, so every data point is a valid start. A tight
/// stopping tolerance keeps the solver's own residual below the comparison.
#[test]
fn mean_does_not_depend_on_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let opts = MeanSolverOptions {
        tol: 1e-8,
        ..Default::default()
    };
    for data in [cap_dataset(12, &mut rng), wishart_dataset(12, &mut rng)] {
        let means: Vec<Point> = (0..data.len())
            .map(|i| {
                let o = MeanSolverOptions {
                    init: MeanInit::Index(i),
                    ..opts
                };
                frechet_mean(&data, &o).unwrap().point
            })
            .collect();
        for a in &means {
            for b in &means {
                assert!(distance(a, b).unwrap() < 1e-5);
            }
        }
    }
}
