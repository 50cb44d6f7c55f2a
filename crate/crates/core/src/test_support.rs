use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::kernels::BivariateSample;

/// Correlated normal-ish sample; with `ties` the `y` values are rounded so
/// that ties occur.
pub fn random_sample<R: Rng>(rng: &mut R, n: usize, ties: bool) -> BivariateSample {
    let rho: f64 = rng.random_range(-0.9..0.9);
    let obs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            let x = 3.0 * a + 10.0;
            let mut y = rho * a + (1.0 - rho * rho).sqrt() * b;
            if ties {
                y = (y * 2.0).round();
            }
            (x, y)
        })
        .collect();
    BivariateSample::new(obs).unwrap()
}

/// `|a - b| <= tol * max(|b|, scale)`.
pub fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(scale).max(f64::MIN_POSITIVE)
}
