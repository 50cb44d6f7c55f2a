//! Simulation designs, closed-form population quantities, and a nested
//! Monte Carlo estimate of the asymptotic variance of the Gini correlation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_h1, kernel_h2, BivariateSample};
use crate::ustat::Orientation;

pub use crate::special::{chisq_cdf, chisq_quantile, chisq_sf, normal_cdf, normal_quantile};

/// Symmetric 2x2 scatter matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterSpec {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl ScatterSpec {
    pub fn new(s11: f64, s12: f64, s22: f64) -> Result<Self> {
        let s = Self { s11, s12, s22 };
        s.validate()?;
        Ok(s)
    }

    /// Unit variances with correlation `rho`.
    pub fn correlation(rho: f64) -> Result<Self> {
        Self::new(1.0, rho, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.s11.is_finite() && self.s12.is_finite() && self.s22.is_finite();
        if finite
            && self.s11 > 0.0
            && self.s22 > 0.0
            && self.s11 * self.s22 - self.s12 * self.s12 > 0.0
        {
            Ok(())
        } else {
            Err(Error::InvalidScatter)
        }
    }

    pub fn rho(&self) -> f64 {
        self.s12 / (self.s11 * self.s22).sqrt()
    }

    /// Lower Cholesky factor `[[l11, 0], [l21, l22]]`.
    fn cholesky(&self) -> Result<[f64; 3]> {
        self.validate()?;
        let l11 = self.s11.sqrt();
        let l21 = self.s12 / l11;
        let l22 = (self.s22 - l21 * l21).sqrt();
        Ok([l11, l21, l22])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Normal,
    T {
        df: f64,
    },
    /// `(X, exp(W))` with `(X, W)` normal.
    NormalLognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    pub scatter: ScatterSpec,
}

impl DistributionSpec {
    pub fn normal(scatter: ScatterSpec) -> Self {
        Self {
            family: Family::Normal,
            scatter,
        }
    }

    pub fn t(df: f64, scatter: ScatterSpec) -> Self {
        Self {
            family: Family::T { df },
            scatter,
        }
    }

    pub fn normal_lognormal(scatter: ScatterSpec) -> Self {
        Self {
            family: Family::NormalLognormal,
            scatter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scatter.validate()?;
        if let Family::T { df } = self.family {
            if !(df >= 3.0) || !df.is_finite() {
                return Err(Error::OutOfRange {
                    name: "df",
                    value: df,
                });
            }
        }
        Ok(())
    }

    /// `(gamma(X,Y), gamma(Y,X))` of the population, when known in closed form.
    ///
    /// Elliptical families have both equal to `rho`; for the normal-lognormal
    /// pair `gamma(X,Y) = rho` and `gamma(Y,X)` follows
    /// [`gini_yx_normal_lognormal`] with `sigma2 = sqrt(s22)`.
    pub fn gini_pair(&self) -> Result<(f64, f64)> {
        let rho = self.scatter.rho();
        match self.family {
            Family::Normal | Family::T { .. } => Ok((rho, rho)),
            Family::NormalLognormal => {
                Ok((rho, gini_yx_normal_lognormal(rho, self.scatter.s22.sqrt())?))
            }
        }
    }
}

/// Base generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of `base_seed`; replications drawn from
/// distinct streams do not depend on scheduling order.
pub fn replication_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

pub fn sample_with_rng<R: Rng + ?Sized>(
    dist: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<BivariateSample> {
    dist.validate()?;
    let [l11, l21, l22] = dist.scatter.cholesky()?;
    let chi = match dist.family {
        Family::T { df } => Some((
            ChiSquared::new(df).map_err(|_| Error::OutOfRange {
                name: "df",
                value: df,
            })?,
            df,
        )),
        _ => None,
    };
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let mut a = l11 * z1;
        let mut b = l21 * z1 + l22 * z2;
        if let Some((chi, df)) = &chi {
            let w: f64 = chi.sample(rng);
            let s = (w / df).sqrt();
            a /= s;
            b /= s;
        }
        if dist.family == Family::NormalLognormal {
            b = b.exp();
        }
        x.push(a);
        y.push(b);
    }
    BivariateSample::from_columns(x, y)
}

/// `n` draws from `dist`; identical seeds give identical samples.
pub fn sample(dist: &DistributionSpec, n: usize, seed: u64) -> Result<BivariateSample> {
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    sample_with_rng(dist, n, &mut rng_from_seed(seed))
}

fn check_rho(rho: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "rho",
            value: rho,
        })
    }
}

/// Asymptotic variance of `sqrt(n) (gamma_hat - gamma)` under bivariate
/// normality.
pub fn v_gamma_normal(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    use std::f64::consts::PI;
    let r2 = rho * rho;
    let v = PI / 3.0 + (PI / 3.0 + 4.0 * 3f64.sqrt()) * r2
        - 4.0 * rho * (rho / 2.0).asin()
        - 4.0 * r2 * (4.0 - r2).sqrt();
    Ok(v.max(0.0))
}

/// Asymptotic variance of the Pearson correlation under bivariate normality.
pub fn v_p_normal(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok((1.0 - rho * rho).powi(2))
}

/// `gamma(Y, X)` for `(X, exp(W))`, `corr(X, W) = rho`, `sd(W) = sigma2`.
pub fn gini_yx_normal_lognormal(rho: f64, sigma2: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::OutOfRange {
            name: "sigma2",
            value: sigma2,
        });
    }
    let s = std::f64::consts::SQRT_2;
    let num = 2.0 * normal_cdf(rho * sigma2 / s) - 1.0;
    let den = 2.0 * normal_cdf(sigma2 / s) - 1.0;
    Ok((num / den).clamp(-1.0, 1.0))
}

/// Nested Monte Carlo estimate of the asymptotic variance of the Gini
/// correlation in the given orientation:
/// `v = 4 zeta1 / theta2^2 + 4 theta1^2 zeta2 / theta2^4 - 8 theta1 zeta3 / theta2^3`
/// with `theta_k = E h_k`, `zeta1 = var(g1)`, `zeta2 = var(g2)`,
/// `zeta3 = cov(g1, g2)` and `g_k(z) = E h_k(z, Z)`.
///
/// Every outer point gets its own inner sample (stream `i + 1` of `seed`),
/// so inner errors are independent across outer points; their contribution
/// `var_inner / n_inner` is estimated and subtracted from each `zeta`.
pub fn v_gamma_monte_carlo(
    dist: &DistributionSpec,
    orientation: Orientation,
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<f64> {
    for (needed, got) in [(100, n_outer), (100, n_inner)] {
        if got < needed {
            return Err(Error::SampleTooSmall { needed, got });
        }
    }
    dist.validate()?;
    let orient = |s: BivariateSample| match orientation {
        Orientation::Xy => s,
        Orientation::Yx => s.swapped(),
    };
    let outer = orient(sample_with_rng(
        dist,
        n_outer,
        &mut replication_rng(seed, 0),
    )?);
    let m = n_inner as f64;

    // per outer point: g1, g2 and the inner (co)variances of h1, h2
    let per_point = (0..n_outer)
        .into_par_iter()
        .map(|i| -> Result<[f64; 5]> {
            let z = outer.get(i);
            let inner = orient(sample_with_rng(
                dist,
                n_inner,
                &mut replication_rng(seed, i as u64 + 1),
            )?);
            let (mut a1, mut a2, mut a11, mut a22, mut a12) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for w in inner.iter() {
                let h1 = kernel_h1(z, w);
                let h2 = kernel_h2(z, w);
                a1 += h1;
                a2 += h2;
                a11 += h1 * h1;
                a22 += h2 * h2;
                a12 += h1 * h2;
            }
            let (g1, g2) = (a1 / m, a2 / m);
            let c = m / (m - 1.0);
            Ok([
                g1,
                g2,
                c * (a11 / m - g1 * g1),
                c * (a22 / m - g2 * g2),
                c * (a12 / m - g1 * g2),
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut acc = [0.0; 8];
    for p in &per_point {
        let [g1, g2, v11, v22, v12] = *p;
        for (slot, v) in acc
            .iter_mut()
            .zip([g1, g2, g1 * g1, g2 * g2, g1 * g2, v11, v22, v12])
        {
            *slot += v;
        }
    }
    let k = n_outer as f64;
    let [s1, s2, s11, s22, s12, w11, w22, w12] = acc.map(|v| v / k);
    let z1 = s11 - s1 * s1 - w11 / m;
    let z2 = s22 - s2 * s2 - w22 / m;
    let z3 = s12 - s1 * s2 - w12 / m;
    let (t1, t2) = (s1, s2);
    if !(t2 > 0.0) {
        return Err(Error::DegenerateSample("zero Gini mean difference"));
    }
    Ok(4.0 * z1 / (t2 * t2) + 4.0 * t1 * t1 * z2 / t2.powi(4) - 8.0 * t1 * z3 / t2.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ustat::{gini_gamma, pearson_r};

    fn normal(rho: f64) -> DistributionSpec {
        DistributionSpec::normal(ScatterSpec::correlation(rho).unwrap())
    }

    #[test]
    fn v_gamma_values() {
        let pi3 = std::f64::consts::PI / 3.0;
        assert!((v_gamma_normal(0.0).unwrap() - pi3).abs() < 1e-15);
        assert!(v_gamma_normal(1.0).unwrap().abs() < 1e-12);
        assert!((v_gamma_normal(0.5).unwrap() - 0.599196).abs() < 1e-6);
        for r in [0.1, 0.3, 0.77, 0.99] {
            assert_eq!(v_gamma_normal(r).unwrap(), v_gamma_normal(-r).unwrap());
        }
        assert!(v_gamma_normal(1.1).is_err());
    }

    #[test]
    fn v_p_values() {
        assert_eq!(v_p_normal(0.0).unwrap(), 1.0);
        assert_eq!(v_p_normal(1.0).unwrap(), 0.0);
        assert_eq!(v_p_normal(-1.0).unwrap(), 0.0);
        assert!((v_p_normal(0.9).unwrap() - 0.0361).abs() < 1e-12);
    }

    #[test]
    fn lognormal_gini_values() {
        let g = gini_yx_normal_lognormal(0.5, 1.0).unwrap();
        // erf(1/4) / erf(1/2)
        assert!((g - 0.5308866).abs() < 1e-6);
        assert!((0.5 - g + 0.031).abs() < 5e-4);
        assert!((0.1 - gini_yx_normal_lognormal(0.1, 1.0).unwrap() + 0.008).abs() < 5e-4);
        let g = gini_yx_normal_lognormal(0.5, 4.0).unwrap();
        assert!((g - 0.84666).abs() < 1e-5);
        assert_eq!(gini_yx_normal_lognormal(0.0, 2.0).unwrap(), 0.0);
        assert!(gini_yx_normal_lognormal(0.5, 0.0).is_err());
    }

    #[test]
    fn scatter_validation() {
        assert_eq!(ScatterSpec::new(1.0, 1.0, 1.0), Err(Error::InvalidScatter));
        assert_eq!(ScatterSpec::new(-1.0, 0.0, 1.0), Err(Error::InvalidScatter));
        let s = ScatterSpec::new(4.0, 1.0, 1.0).unwrap();
        assert!((s.rho() - 0.5).abs() < 1e-15);
        let bad = DistributionSpec::t(2.0, s);
        assert!(sample(&bad, 10, 1).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let d = DistributionSpec::t(5.0, ScatterSpec::correlation(0.3).unwrap());
        assert_eq!(sample(&d, 50, 42).unwrap(), sample(&d, 50, 42).unwrap());
        assert_ne!(sample(&d, 50, 42).unwrap(), sample(&d, 50, 43).unwrap());
        let a = sample_with_rng(&d, 20, &mut replication_rng(7, 3)).unwrap();
        let b = sample_with_rng(&d, 20, &mut replication_rng(7, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normal_sampler_moments() {
        let s = sample(&normal(0.5), 100_000, 1).unwrap();
        assert!((pearson_r(&s).unwrap() - 0.5).abs() < 0.01);
        let d = DistributionSpec::normal(ScatterSpec::new(4.0, 1.2, 1.0).unwrap());
        let s = sample(&d, 1_000_000, 2).unwrap();
        let n = s.len() as f64;
        let mx = s.x().iter().sum::<f64>() / n;
        let my = s.y().iter().sum::<f64>() / n;
        let cov = |a: &[f64], ma: f64, b: &[f64], mb: f64| {
            a.iter()
                .zip(b)
                .map(|(p, q)| (p - ma) * (q - mb))
                .sum::<f64>()
                / (n - 1.0)
        };
        assert!((cov(s.x(), mx, s.x(), mx) / 4.0 - 1.0).abs() < 0.01);
        assert!((cov(s.x(), mx, s.y(), my) / 1.2 - 1.0).abs() < 0.01);
        assert!((cov(s.y(), my, s.y(), my) - 1.0).abs() < 0.01);
    }

    #[test]
    fn t_sampler_variance() {
        let d = DistributionSpec::t(5.0, ScatterSpec::new(2.0, 0.5, 1.0).unwrap());
        let s = sample(&d, 100_000, 3).unwrap();
        let n = s.len() as f64;
        let m = s.x().iter().sum::<f64>() / n;
        let v = s.x().iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((v / (5.0 / 3.0 * 2.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn lognormal_sampler_is_positive() {
        let d = DistributionSpec::normal_lognormal(ScatterSpec::new(4.0, 1.0, 1.0).unwrap());
        let s = sample(&d, 1000, 4).unwrap();
        assert!(s.y().iter().all(|&y| y > 0.0));
    }

    #[test]
    fn elliptical_gini_equals_rho() {
        for d in [
            normal(0.5),
            DistributionSpec::t(5.0, ScatterSpec::correlation(0.5).unwrap()),
        ] {
            let s = sample(&d, 100_000, 5).unwrap();
            // standard error about sqrt(v / n) < 0.003
            for o in [Orientation::Xy, Orientation::Yx] {
                assert!((gini_gamma(&s, o).unwrap() - 0.5).abs() < 0.009);
            }
        }
    }

    #[test]
    fn monte_carlo_variance_matches_closed_form() {
        for rho in [0.0, 0.5] {
            let v = v_gamma_monte_carlo(&normal(rho), Orientation::Xy, 10_000, 1_000, 11).unwrap();
            let want = v_gamma_normal(rho).unwrap();
            assert!((v / want - 1.0).abs() < 0.05, "rho {rho}: {v} vs {want}");
        }
        let t5 = DistributionSpec::t(5.0, ScatterSpec::correlation(0.5).unwrap());
        let a = v_gamma_monte_carlo(&t5, Orientation::Yx, 1_000, 200, 3).unwrap();
        let b = v_gamma_monte_carlo(&t5, Orientation::Yx, 1_000, 200, 3).unwrap();
        assert!(a > 0.0 && a.is_finite());
        assert_eq!(a, b);
        assert!(v_gamma_monte_carlo(&t5, Orientation::Xy, 50, 200, 3).is_err());
    }
}
