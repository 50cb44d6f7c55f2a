//! Normal and chi-square distribution functions.
//!
//! `erfc` comes from `libm`; its inverse and the regularized incomplete
//! gamma come from `statrs`. The chi-square quantile is polished here so that it inverts
//! [`chisq_cdf`] to `1e-8` or better.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: p })
    }
}

fn check_df(df: f64) -> Result<()> {
    if df > 0.0 && df.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "df",
            value: df,
        })
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob("p", p)?;
    Ok(-std::f64::consts::SQRT_2 * erfc_inv(2.0 * p))
}

/// `P(chi2_df <= x)`.
pub fn chisq_cdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x.is_nan() {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
        });
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(gamma_lr(0.5 * df, 0.5 * x))
}

/// `P(chi2_df > x)`, computed from the upper incomplete gamma so that small
/// p-values keep their relative accuracy.
pub fn chisq_sf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x.is_nan() {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
        });
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(gamma_ur(0.5 * df, 0.5 * x))
}

fn chisq_pdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * df;
    ((k - 1.0) * x.ln() - 0.5 * x - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Inverse of [`chisq_cdf`]: Wilson-Hilferty start, then Newton steps kept
/// inside a shrinking bracket.
pub fn chisq_quantile(p: f64, df: f64) -> Result<f64> {
    check_prob("p", p)?;
    check_df(df)?;
    let z = normal_quantile(p)?;
    let c = 2.0 / (9.0 * df);
    let mut x = (df * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8);

    let (mut lo, mut hi) = (0.0, x.max(1.0));
    while chisq_cdf(hi, df)? < p {
        lo = hi;
        hi *= 2.0;
    }
    if x <= lo || x >= hi {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = chisq_cdf(x, df)? - p;
        if f.abs() < 1e-15 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = chisq_pdf(x, df);
        let newton = x - f / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(std::f64::consts::FRAC_1_SQRT_2) - 0.760250).abs() < 1e-6);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-14);
        assert!((normal_quantile(0.975).unwrap() - 1.959963984540054).abs() < 1e-12);
        assert!((normal_quantile(0.95).unwrap() - 1.6448536269514722).abs() < 1e-12);
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(0.0).is_err());
    }

    #[test]
    fn normal_round_trip() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn chisq_values() {
        assert!((chisq_quantile(0.90, 2.0).unwrap() - (-2.0 * 0.1f64.ln())).abs() < 1e-10);
        assert!((chisq_quantile(0.95, 1.0).unwrap() - 3.841458820694124).abs() < 1e-10);
        assert!((chisq_quantile(0.90, 1.0).unwrap() - 2.705543454095404).abs() < 1e-10);
        assert!((chisq_quantile(0.95, 2.0).unwrap() - 5.991464547107979).abs() < 1e-10);
        // df = 2: closed form 1 - exp(-x/2)
        for x in [0.1, 1.0, 3.0, 10.0] {
            assert!((chisq_cdf(x, 2.0).unwrap() - (1.0 - (-0.5 * x).exp())).abs() < 1e-14);
            assert!((chisq_sf(x, 2.0).unwrap() - (-0.5f64 * x).exp()).abs() < 1e-14);
        }
        // df = 1: P(chi2 <= z^2) = 2 Phi(z) - 1
        let z = 1.3;
        assert!((chisq_cdf(z * z, 1.0).unwrap() - (2.0 * normal_cdf(z) - 1.0)).abs() < 1e-13);
        assert_eq!(chisq_cdf(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(chisq_sf(f64::INFINITY, 2.0).unwrap(), 0.0);
        assert!(chisq_cdf(1.0, 0.0).is_err());
    }

    #[test]
    fn chisq_round_trip() {
        for df in [1.0, 2.0, 3.0, 5.0, 10.0] {
            for i in 1..=999 {
                let p = i as f64 / 1000.0;
                let x = chisq_quantile(p, df).unwrap();
                assert!(
                    (chisq_cdf(x, df).unwrap() - p).abs() < 1e-8,
                    "df {df} p {p}"
                );
            }
        }
    }
}
