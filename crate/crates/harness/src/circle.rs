//! The circle configuration whose Fréchet mean can be moved anywhere by a
//! single record.
//!
//! For even `n`, `n − 1` points sit at angles `2πi/(n − 1)` and the last
//! point duplicates one of them. The duplicated point is the mean, so
//! moving the duplicate moves the mean across the whole circle.

use std::f64::consts::PI;

/// Arc-length distance between two angles.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

pub fn circle_energy(data: &[f64], x: f64) -> f64 {
    data.iter().map(|&p| circle_distance(x, p).powi(2)).sum::<f64>() / (2.0 * data.len() as f64)
}

/// Minimizer of the energy among `candidates`; ties go to the first.
pub fn circle_mean(data: &[f64], candidates: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for &c in candidates {
        let e = circle_energy(data, c);
        if e < best.0 {
            best = (e, c);
        }
    }
    best.1
}

/// The `n − 1` evenly spaced angles `2πi/(n − 1)`, `i = 1, …, n − 1`.
pub fn base_angles(n: usize) -> Vec<f64> {
    (1..n).map(|i| 2.0 * PI * i as f64 / (n - 1) as f64).collect()
}

/// Largest distance between the means of the configuration with the
/// duplicate on the first base point and every configuration obtained by
/// moving that duplicate to another base point. By rotational symmetry the
/// starting position does not matter.
pub fn duplicate_swap_sensitivity(n: usize) -> f64 {
    let base = base_angles(n);
    let with_duplicate = |j: usize| {
        let mut d = base.clone();
        d.push(base[j]);
        d
    };
    let mean0 = circle_mean(&with_duplicate(0), &base);
    (0..base.len())
        .map(|j| circle_distance(mean0, circle_mean(&with_duplicate(j), &base)))
        .fold(0.0, f64::max)
}
