use std::f64::consts::{FRAC_PI_8, PI};

use manifold_dp::geometry::{distance, in_ball, BallSpec, ManifoldDescriptor, Point};
use manifold_dp::mechanism::{sample_euclidean_laplace, LaplaceChain};
use manifold_dp::spdm::{sample_ball_wishart_counted, sym_exp, wishart_sample};
use manifold_dp::sphere::{draw_tangent_proposal, sample_polar_cap};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn north() -> Point {
    Point::north_pole(2).unwrap()
}

#[test]
fn polar_cap_angles_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s2 = ManifoldDescriptor::sphere(2).unwrap();
    let r = FRAC_PI_8;
    let ball = BallSpec::new(north(), r).unwrap();
    let mut thetas = Vec::with_capacity(100_000);
    let mut phis = Vec::with_capacity(100_000);
    for _ in 0..100_000 {
        let p = sample_polar_cap(&s2, r, &mut rng).unwrap();
        let c = p.coords();
        assert!((c.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= 1e-10);
        assert!(in_ball(&ball, &p).unwrap());
        thetas.push(distance(&north(), &p).unwrap());
        phis.push(c[1].atan2(c[0]).rem_euclid(2.0 * PI));
    }
    assert!(ks_distance(thetas, |t| (t / r).clamp(0.0, 1.0)) < 0.01);
    assert!(ks_distance(phis, |p| (p / (2.0 * PI)).clamp(0.0, 1.0)) < 0.01);
}

#[test]
fn sphere_proposal_is_tangent_short_and_centered() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = Point::sphere(vec![0.6, 0.0, 0.8]).unwrap();
    let sigma = 0.3;
    let mut comps = vec![Vec::with_capacity(100_000); 3];
    for _ in 0..100_000 {
        let v = draw_tangent_proposal(&x, sigma, &mut rng).unwrap();
        let c = v.coords();
        let dot: f64 = c.iter().zip(x.coords()).map(|(a, b)| a * b).sum();
        assert!(dot.abs() <= 1e-10);
        assert!(c.iter().map(|a| a * a).sum::<f64>().sqrt() <= sigma + 1e-15);
        for (j, comp) in comps.iter_mut().enumerate() {
            comp.push(c[j]);
        }
    }
    for comp in &comps {
        let (m, se) = mean_and_se(comp);
        assert!(m.abs() < 3.0 * se, "component mean {m} vs se {se}");
    }
}

#[test]
fn wishart_mean_is_df_times_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut entries = vec![Vec::with_capacity(100_000); 4];
    for _ in 0..100_000 {
        let p = wishart_sample(2, 2, &mut rng).unwrap();
        for (j, e) in entries.iter_mut().enumerate() {
            e.push(p.coords()[j]);
        }
    }
    let expected = [1.0, 0.0, 0.0, 1.0];
    for (e, want) in entries.iter().zip(expected) {
        let (m, se) = mean_and_se(e);
        assert!((m - want).abs() < 3.0 * se, "entry mean {m}, expected {want}, se {se}");
    }
}

#[test]
fn ball_wishart_draws_stay_in_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ball = BallSpec::new(Point::identity(2).unwrap(), 1.5).unwrap();
    let mut attempts = 0;
    let draws = 20_000;
    for _ in 0..draws {
        let (p, a) = sample_ball_wishart_counted(&ball, 2, &mut rng).unwrap();
        assert!(in_ball(&ball, &p).unwrap());
        attempts += a;
    }
    let rate = draws as f64 / attempts as f64;
    println!("acceptance rate for k=2, df=2, r=1.5: {rate:.4}");
    assert!(rate > 0.0);
}

/// The smallest Frobenius ball around I containing the geodesic ball of
/// radius r has radius e^r − 1.
#[test]
fn ambient_radius_brute_force() {
    let r: f64 = 1.5;
    let bound = r.exp_m1();
    let id = DMatrix::<f64>::identity(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let ball = BallSpec::new(Point::identity(2).unwrap(), r).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let (x, _) = sample_ball_wishart_counted(&ball, 2, &mut rng).unwrap();
        worst = worst.max((x.as_matrix() - &id).norm());
    }
    // Matrix logarithms spread up to the boundary sphere of radius r.
    for _ in 0..100_000 {
        let g: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
        let s = DMatrix::from_row_slice(2, 2, &[g[0], g[1], g[1], g[2]]);
        let radius = r * rng.random::<f64>().sqrt().sqrt();
        let x = sym_exp(&(&s * (radius / s.norm())));
        worst = worst.max((x - &id).norm());
    }
    assert!(worst <= bound + 1e-12, "{worst} exceeds {bound}");
    let corner = DMatrix::from_row_slice(2, 2, &[r.exp(), 0.0, 0.0, 1.0]);
    assert!(((corner - &id).norm() - bound).abs() < 1e-6);
}

#[test]
fn euclidean_laplace_zero_scale_is_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let c = [0.5, -1.0, 2.0];
    assert_eq!(sample_euclidean_laplace(&c, 0.0, &mut rng).unwrap(), c.to_vec());
}

#[test]
fn euclidean_laplace_one_dimensional_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let sigma = 0.7;
    let xs: Vec<f64> = (0..100_000)
        .map(|_| sample_euclidean_laplace(&[0.0], sigma, &mut rng).unwrap()[0])
        .collect();
    let cdf = |x: f64| {
        if x < 0.0 {
            0.5 * (x / sigma).exp()
        } else {
            1.0 - 0.5 * (-x / sigma).exp()
        }
    };
    assert!(ks_distance(xs, cdf) < 0.01);
}

#[test]
fn euclidean_laplace_second_moment() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let c = [1.0, 2.0, 3.0];
    let n = 1_000_000;
    let total: f64 = (0..n)
        .map(|_| {
            let y = sample_euclidean_laplace(&c, 1.0, &mut rng).unwrap();
            y.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        })
        .sum();
    let m = total / n as f64;
    assert!((m - 12.0).abs() / 12.0 < 0.01, "second moment {m}");
}

/// CDF of the geodesic distance to the footpoint on S² under the density
/// ∝ exp(−θ/σ) sin θ, tabulated by the trapezoid rule.
fn radial_cdf(sigma: f64) -> impl Fn(f64) -> f64 {
    let m = 200_000;
    let h = PI / m as f64;
    let f = |s: f64| (-s / sigma).exp() * s.sin();
    let mut cum = vec![0.0; m + 1];
    for i in 1..=m {
        let (a, b) = ((i - 1) as f64 * h, i as f64 * h);
        cum[i] = cum[i - 1] + 0.5 * h * (f(a) + f(b));
    }
    let total = cum[m];
    move |t: f64| {
        let x = (t / h).clamp(0.0, m as f64);
        let i = (x.floor() as usize).min(m - 1);
        let frac = x - i as f64;
        (cum[i] + frac * (cum[i + 1] - cum[i])) / total
    }
}

#[test]
fn sphere_chain_radial_and_azimuthal_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sigma = 0.1;
    let eta = north();
    let mut chain = LaplaceChain::new(eta.clone(), sigma, 10_000, 100, None).unwrap();
    let mut thetas = Vec::with_capacity(5000);
    let mut bins = [0usize; 8];
    for _ in 0..5000 {
        let x = chain.next_sample(&mut rng).unwrap();
        thetas.push(distance(&eta, &x).unwrap());
        let c = x.coords();
        let phi = c[1].atan2(c[0]).rem_euclid(2.0 * PI);
        bins[((phi / (2.0 * PI) * 8.0) as usize).min(7)] += 1;
    }
    println!("acceptance rate {:.3}", chain.acceptance_rate());
    let ks = ks_distance(thetas, radial_cdf(sigma));
    assert!(ks < 0.02, "radial KS distance {ks}");

    let expected = 5000.0 / 8.0;
    let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
    // Upper 0.001 quantile of chi-square with 7 degrees of freedom.
    assert!(chi2 < 24.322, "azimuth chi-square {chi2}");
}

/// Ten independent chains pooled: with 50 000 draws the KS distance should
/// sit far below the single-chain tolerance.
#[test]
fn pooled_sphere_chains_match_radial_law() {
    let sigma = 0.1;
    let eta = north();
    let mut thetas = Vec::with_capacity(50_000);
    for seed in 100..110 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chain = LaplaceChain::new(eta.clone(), sigma, 10_000, 100, None).unwrap();
        for _ in 0..5000 {
            thetas.push(distance(&eta, &chain.next_sample(&mut rng).unwrap()).unwrap());
        }
    }
    // 1% critical value of the KS statistic at n = 50 000.
    let ks = ks_distance(thetas, radial_cdf(sigma));
    assert!(ks < 1.63 / (50_000f64).sqrt(), "pooled KS distance {ks}");
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn chain_concentrates_at_footpoint_for_small_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let footpoints = [
        Point::sphere(vec![0.0, 0.6, 0.8]).unwrap(),
        Point::spdm(&DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5])).unwrap(),
    ];
    for eta in footpoints {
        for sigma in [1e-2, 1e-3] {
            let mut chain = LaplaceChain::new(eta.clone(), sigma, 10_000, 100, None).unwrap();
            let ds: Vec<f64> = (0..2000)
                .map(|_| distance(&eta, &chain.next_sample(&mut rng).unwrap()).unwrap())
                .collect();
            let med = median(ds);
            assert!(med < 3.0 * sigma, "median {med} at sigma {sigma}");
        }
    }
}

#[test]
fn conditioned_chain_stays_in_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let ball = BallSpec::new(north(), FRAC_PI_8).unwrap();
    let eta = Point::sphere(vec![0.3, 0.0, 0.3f64.mul_add(-0.3, 1.0).sqrt()]).unwrap();
    let mut chain = LaplaceChain::new(eta, 0.2, 1000, 10, Some(ball.clone())).unwrap();
    for _ in 0..500 {
        let x = chain.next_sample(&mut rng).unwrap();
        assert!(in_ball(&ball, &x).unwrap());
    }
}
