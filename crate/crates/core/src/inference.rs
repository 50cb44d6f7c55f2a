//! Point estimates, confidence intervals and hypothesis tests.
//!
//! JEL intervals are found by scanning `-2 log R` outward from the point
//! estimate on a fixed grid up to the parameter domain boundary, then
//! bisecting the outermost threshold crossing on each side. The scan is
//! shared by every requested level.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::el::{
    adjust_pseudo_rows, adjust_pseudo_values, infinite_on_hull_violation, neg2_log_r_scalar,
    neg2_log_r_vector, AdjustmentPolicy,
};
use crate::error::{Error, Result};
use crate::jackknife::{
    delta_profile, gamma_profile, jackknife_variance_from, leave_one_out_delta,
    leave_one_out_gamma, AffinePseudo, TwoSampleProfile,
};
use crate::kernels::BivariateSample;
use crate::special::{chisq_quantile, chisq_sf, normal_quantile};
use crate::ustat::{gini_gamma, pearson_r, Orientation};

/// Grid step of the outward scan.
pub const SCAN_STEP: f64 = 0.02;
/// Width at which endpoint bisection stops.
pub const BISECTION_TOL: f64 = 1e-12;
/// Significance levels reported in [`TestResult::reject_at`].
pub const REPORTED_ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];
/// Smallest sample accepted by intervals and tests.
pub const MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    GammaXy,
    GammaYx,
    Delta,
    Pearson,
}

impl Target {
    /// Parameter domain used to clip interval searches.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Target::Delta => (-2.0, 2.0),
            _ => (-1.0, 1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Target::GammaXy => "gamma_xy",
            Target::GammaYx => "gamma_yx",
            Target::Delta => "delta",
            Target::Pearson => "pearson",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma_xy" => Ok(Target::GammaXy),
            "gamma_yx" => Ok(Target::GammaYx),
            "delta" => Ok(Target::Delta),
            "pearson" => Ok(Target::Pearson),
            other => Err(Error::Unsupported(format!("unknown target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Jel,
    Ajel,
    JackknifeNormal,
    AsymptoticNormal,
    Pearson,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Jel => "jel",
            Method::Ajel => "ajel",
            Method::JackknifeNormal => "jackknife_normal",
            Method::AsymptoticNormal => "asymptotic_normal",
            Method::Pearson => "pearson",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jel" => Ok(Method::Jel),
            "ajel" => Ok(Method::Ajel),
            "jackknife_normal" | "jackknife" => Ok(Method::JackknifeNormal),
            "asymptotic_normal" | "asymptotic" => Ok(Method::AsymptoticNormal),
            "pearson" => Ok(Method::Pearson),
            other => Err(Error::Unsupported(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: Method,
    pub target: Target,
    /// Endpoint reached the domain boundary without a threshold crossing.
    pub lower_clipped: bool,
    pub upper_clipped: bool,
    /// The statistic dipped back below the threshold beyond a first crossing.
    pub non_monotone: bool,
}

impl IntervalEstimate {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }

    fn symmetric(point: f64, half: f64, level: f64, method: Method, target: Target) -> Self {
        Self {
            point,
            lower: point - half,
            upper: point + half,
            level,
            method,
            target,
            lower_clipped: false,
            upper_clipped: false,
            non_monotone: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    /// `-2 log R` at the null; `+inf` when the null is outside the hull.
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    /// Keyed by significance level, e.g. `"0.05"`.
    pub reject_at: BTreeMap<String, bool>,
    pub warning: Option<String>,
}

impl TestResult {
    fn new(statistic: f64, df: u32, warning: Option<String>) -> Result<Self> {
        let p_value = chisq_sf(statistic, df as f64)?.clamp(0.0, 1.0);
        let mut reject_at = BTreeMap::new();
        for alpha in REPORTED_ALPHAS {
            reject_at.insert(
                format!("{alpha:.2}"),
                statistic > chisq_quantile(1.0 - alpha, df as f64)?,
            );
        }
        Ok(Self {
            statistic,
            df,
            p_value,
            reject_at,
            warning,
        })
    }

    /// Rejects when the statistic exceeds the `1 - alpha` chi-square quantile.
    pub fn rejects(&self, alpha: f64) -> Result<bool> {
        Ok(self.statistic > chisq_quantile(1.0 - alpha, self.df as f64)?)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.5 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "level",
            value: level,
        })
    }
}

fn z_value(level: f64) -> Result<f64> {
    check_level(level)?;
    normal_quantile(0.5 + 0.5 * level)
}

/// Point estimate of a target.
pub fn estimate(sample: &BivariateSample, target: Target) -> Result<f64> {
    sample.require(2)?;
    match target {
        Target::GammaXy => gini_gamma(sample, Orientation::Xy),
        Target::GammaYx => gini_gamma(sample, Orientation::Yx),
        Target::Delta => {
            Ok(gini_gamma(sample, Orientation::Xy)? - gini_gamma(sample, Orientation::Yx)?)
        }
        Target::Pearson => pearson_r(sample),
    }
}

/// `theta -> -2 log R(theta)` for a scalar target.
#[derive(Debug, Clone)]
pub struct ScalarProfile {
    pseudo: AffinePseudo,
    point: f64,
    /// Where the statistic vanishes; the scan starts here.
    center: f64,
    policy: AdjustmentPolicy,
}

impl ScalarProfile {
    pub fn new(sample: &BivariateSample, target: Target, adjusted: bool) -> Result<Self> {
        sample.require(MIN_N)?;
        let (pseudo, point) = match target {
            Target::GammaXy | Target::GammaYx => {
                let o = if target == Target::GammaXy {
                    Orientation::Xy
                } else {
                    Orientation::Yx
                };
                (gamma_profile(sample, o)?, gini_gamma(sample, o)?)
            }
            Target::Delta => {
                let (p, gamma2) = delta_profile(sample)?;
                (p, gini_gamma(sample, Orientation::Xy)? - gamma2)
            }
            Target::Pearson => {
                return Err(Error::Unsupported(
                    "empirical likelihood is not available for the pearson target".into(),
                ))
            }
        };
        let policy = if adjusted {
            AdjustmentPolicy::HALF_LOG
        } else {
            AdjustmentPolicy::OFF
        };
        let (lo, hi) = target.domain();
        let center = pseudo.root().unwrap_or(point).clamp(lo, hi);
        Ok(Self {
            pseudo,
            point,
            center,
            policy,
        })
    }

    pub fn point(&self) -> f64 {
        self.point
    }

    /// `-2 log R(theta)`; `+inf` outside the hull.
    pub fn statistic(&self, theta: f64) -> Result<f64> {
        let values = self.pseudo.at(theta).values;
        let values = adjust_pseudo_values(&values, self.policy);
        infinite_on_hull_violation(neg2_log_r_scalar(&values))
    }

    fn method(&self) -> Method {
        if self.policy.enabled {
            Method::Ajel
        } else {
            Method::Jel
        }
    }
}

/// Statistic values on the outward grid of one side, starting where the
/// statistic vanishes and ending exactly at the domain boundary.
struct SideScan {
    thetas: Vec<f64>,
    stats: Vec<f64>,
}

impl SideScan {
    fn new(profile: &ScalarProfile, bound: f64) -> Result<Self> {
        let start = profile.center;
        let dir = if bound >= start { 1.0 } else { -1.0 };
        let span = (bound - start).abs();
        let steps = (span / SCAN_STEP).ceil() as usize;
        let mut thetas = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = start + dir * (k as f64 * SCAN_STEP).min(span);
            thetas.push(if k == steps { bound } else { t });
        }
        let stats = thetas
            .iter()
            .map(|&t| profile.statistic(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { thetas, stats })
    }

    /// Endpoint for threshold `q`: `(endpoint, clipped, non_monotone)`.
    fn endpoint(&self, profile: &ScalarProfile, q: f64) -> Result<(f64, bool, bool)> {
        let last_inside = self.stats.iter().rposition(|&s| s <= q).unwrap_or(0);
        let non_monotone = self.stats[..last_inside].iter().any(|&s| s > q);
        if last_inside + 1 == self.thetas.len() {
            return Ok((self.thetas[last_inside], true, non_monotone));
        }
        let (mut a, mut b) = (self.thetas[last_inside], self.thetas[last_inside + 1]);
        while (b - a).abs() > BISECTION_TOL {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if profile.statistic(m)? <= q {
                a = m;
            } else {
                b = m;
            }
        }
        Ok((a, false, non_monotone))
    }
}

/// JEL (or adjusted JEL) intervals at several levels from one scan.
pub fn ci_jel_levels(
    sample: &BivariateSample,
    target: Target,
    levels: &[f64],
    adjusted: bool,
) -> Result<Vec<IntervalEstimate>> {
    for &l in levels {
        check_level(l)?;
    }
    let profile = ScalarProfile::new(sample, target, adjusted)?;
    let (lo, hi) = target.domain();
    let down = SideScan::new(&profile, lo)?;
    let up = SideScan::new(&profile, hi)?;
    levels
        .iter()
        .map(|&level| {
            let q = chisq_quantile(level, 1.0)?;
            let (lower, lower_clipped, nm_lo) = down.endpoint(&profile, q)?;
            let (upper, upper_clipped, nm_hi) = up.endpoint(&profile, q)?;
            Ok(IntervalEstimate {
                point: profile.point,
                lower,
                upper,
                level,
                method: profile.method(),
                target,
                lower_clipped,
                upper_clipped,
                non_monotone: nm_lo || nm_hi,
            })
        })
        .collect()
}

/// `{theta : -2 log R(theta) <= chi2_{1, level}}` for a Gini target.
pub fn ci_jel(
    sample: &BivariateSample,
    target: Target,
    level: f64,
    adjusted: bool,
) -> Result<IntervalEstimate> {
    Ok(ci_jel_levels(sample, target, &[level], adjusted)?.remove(0))
}

fn pearson_leave_one_out(sample: &BivariateSample) -> Result<Vec<f64>> {
    sample.require(3)?;
    let n = sample.len() as f64;
    let mx = sample.x().iter().sum::<f64>() / n;
    let my = sample.y().iter().sum::<f64>() / n;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for o in sample.iter() {
        let (a, b) = (o.x - mx, o.y - my);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let m = n - 1.0;
    sample
        .iter()
        .map(|o| {
            let (a, b) = (o.x - mx, o.y - my);
            let (tx, ty) = (sx - a, sy - b);
            let cxx = (sxx - a * a) - tx * tx / m;
            let cyy = (syy - b * b) - ty * ty / m;
            let cxy = (sxy - a * b) - tx * ty / m;
            if cxx <= 0.0 || cyy <= 0.0 {
                return Err(Error::DegenerateSample(
                    "zero variance in a leave-one-out sample",
                ));
            }
            Ok((cxy / (cxx.sqrt() * cyy.sqrt())).clamp(-1.0, 1.0))
        })
        .collect()
}

/// Jackknife variance of the target's estimator.
pub fn jackknife_variance_of(sample: &BivariateSample, target: Target) -> Result<f64> {
    sample.require(3)?;
    let loo = match target {
        Target::GammaXy => leave_one_out_gamma(sample, Orientation::Xy)?,
        Target::GammaYx => leave_one_out_gamma(sample, Orientation::Yx)?,
        Target::Delta => leave_one_out_delta(sample)?,
        Target::Pearson => pearson_leave_one_out(sample)?,
    };
    Ok(jackknife_variance_from(&loo))
}

/// `point +- z sqrt(v_jack)`.
pub fn ci_normal_jackknife(
    sample: &BivariateSample,
    target: Target,
    level: f64,
) -> Result<IntervalEstimate> {
    sample.require(MIN_N)?;
    let z = z_value(level)?;
    let point = estimate(sample, target)?;
    let v = jackknife_variance_of(sample, target)?;
    Ok(IntervalEstimate::symmetric(
        point,
        z * v.sqrt(),
        level,
        Method::JackknifeNormal,
        target,
    ))
}

/// `point +- z sqrt(variance / n)` with an externally supplied asymptotic
/// variance.
pub fn ci_normal_asymptotic(
    sample: &BivariateSample,
    target: Target,
    level: f64,
    variance: f64,
) -> Result<IntervalEstimate> {
    if !(variance >= 0.0) {
        return Err(Error::NegativeVariance(variance));
    }
    sample.require(2)?;
    let z = z_value(level)?;
    let point = estimate(sample, target)?;
    let half = z * (variance / sample.len() as f64).sqrt();
    Ok(IntervalEstimate::symmetric(
        point,
        half,
        level,
        Method::AsymptoticNormal,
        target,
    ))
}

/// Source of the asymptotic variance `v_p` of the Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "value")]
pub enum PearsonVariance {
    /// `(1 - r^2)^2`.
    ClosedFormNormal,
    /// Moment formula with sample central moments.
    Moments,
    /// `n` times the jackknife variance of `r`.
    Jackknife,
    Supplied(f64),
}

/// `v_p` from sample central moments `s_kl`.
pub fn pearson_variance_moments(sample: &BivariateSample) -> Result<f64> {
    sample.require(2)?;
    let n = sample.len() as f64;
    let mx = sample.x().iter().sum::<f64>() / n;
    let my = sample.y().iter().sum::<f64>() / n;
    let mut m = [[0.0f64; 5]; 5];
    for o in sample.iter() {
        let (a, b) = (o.x - mx, o.y - my);
        for (k, l) in [
            (2, 0),
            (0, 2),
            (1, 1),
            (2, 2),
            (4, 0),
            (0, 4),
            (3, 1),
            (1, 3),
        ] {
            m[k][l] += a.powi(k as i32) * b.powi(l as i32);
        }
    }
    let s = |k: usize, l: usize| m[k][l] / n;
    let (s20, s02, s11) = (s(2, 0), s(0, 2), s(1, 1));
    if s20 <= 0.0 || s02 <= 0.0 {
        return Err(Error::DegenerateSample("zero variance in a coordinate"));
    }
    let rho = s11 / (s20 * s02).sqrt();
    // rho^2 s31 / (s11 s20) written as rho s31 / (s20^1.5 s02^0.5) to stay
    // defined when s11 = 0
    let cross =
        rho * (s(3, 1) / (s20.powf(1.5) * s02.sqrt()) + s(1, 3) / (s02.powf(1.5) * s20.sqrt()));
    let v = (1.0 + rho * rho / 2.0) * s(2, 2) / (s20 * s02)
        + rho * rho / 4.0 * (s(4, 0) / (s20 * s20) + s(0, 4) / (s02 * s02))
        - cross;
    Ok(v)
}

/// `r +- z sqrt(v_p / n)`.
pub fn ci_pearson(
    sample: &BivariateSample,
    level: f64,
    variance: PearsonVariance,
) -> Result<IntervalEstimate> {
    sample.require(MIN_N)?;
    let z = z_value(level)?;
    let r = pearson_r(sample)?;
    let n = sample.len() as f64;
    let vp = match variance {
        PearsonVariance::ClosedFormNormal => (1.0 - r * r).powi(2),
        PearsonVariance::Moments => pearson_variance_moments(sample)?,
        PearsonVariance::Jackknife => n * jackknife_variance_of(sample, Target::Pearson)?,
        PearsonVariance::Supplied(v) => v,
    };
    if !(vp >= 0.0) {
        return Err(Error::NegativeVariance(vp));
    }
    Ok(IntervalEstimate::symmetric(
        r,
        z * (vp / n).sqrt(),
        level,
        Method::Pearson,
        Target::Pearson,
    ))
}

/// JEL test of `gamma(X,Y) = gamma(Y,X)`.
pub fn test_equality(sample: &BivariateSample, adjusted: bool) -> Result<TestResult> {
    let profile = ScalarProfile::new(sample, Target::Delta, adjusted)?;
    TestResult::new(profile.statistic(0.0)?, 1, None)
}

/// Pseudo-value statistic for the two-sample Gini differences.
#[derive(Debug, Clone)]
pub struct TwoSampleTest {
    profile: TwoSampleProfile,
    policy: AdjustmentPolicy,
}

impl TwoSampleTest {
    pub fn new(first: &BivariateSample, second: &BivariateSample, adjusted: bool) -> Result<Self> {
        first.require(MIN_N)?;
        second.require(MIN_N)?;
        Ok(Self {
            profile: TwoSampleProfile::new(first, second)?,
            policy: if adjusted {
                AdjustmentPolicy::HALF_LOG
            } else {
                AdjustmentPolicy::OFF
            },
        })
    }

    pub fn estimate(&self) -> Result<[f64; 2]> {
        self.profile.estimate()
    }

    /// `-2 log R(delta1, delta2)`; `+inf` outside the hull.
    pub fn statistic(&self, delta: [f64; 2]) -> Result<f64> {
        let rows = adjust_pseudo_rows(&self.profile.at(delta).rows, self.policy);
        infinite_on_hull_violation(neg2_log_r_vector(&rows))
    }
}

/// Sample-size ratio outside `[1/10, 10]` only produces a warning.
fn size_warning(n1: usize, n2: usize) -> Option<String> {
    let r = n1 as f64 / n2 as f64;
    if (0.1..=10.0).contains(&r) {
        None
    } else {
        Some(format!(
            "sample sizes {n1} and {n2} are far from comparable (ratio {r:.3}); the chi-square calibration may be poor"
        ))
    }
}

/// JEL test that both Gini correlations agree across two independent samples.
pub fn test_two_sample(
    first: &BivariateSample,
    second: &BivariateSample,
    adjusted: bool,
) -> Result<TestResult> {
    let t = TwoSampleTest::new(first, second, adjusted)?;
    TestResult::new(
        t.statistic([0.0, 0.0])?,
        2,
        size_warning(first.len(), second.len()),
    )
}

/// Rectangle `[x0, x1] x [y0, y1]` with `res` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub res: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let inside = |v: f64| (-2.0..=2.0).contains(&v);
        if !(inside(self.x0) && inside(self.x1) && inside(self.y0) && inside(self.y1)) {
            return Err(Error::Unsupported("grid must lie inside [-2, 2]^2".into()));
        }
        if !(self.x0 < self.x1 && self.y0 < self.y1) {
            return Err(Error::Unsupported("grid bounds must be increasing".into()));
        }
        if self.res < 2 {
            return Err(Error::Unsupported(
                "grid resolution must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn axis(&self, lo: f64, hi: f64) -> Vec<f64> {
        let step = (hi - lo) / (self.res - 1) as f64;
        (0..self.res)
            .map(|i| {
                if i + 1 == self.res {
                    hi
                } else {
                    lo + i as f64 * step
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;
    /// `x0:x1:y0:y1:res`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Unsupported(format!("grid `{s}` is not x0:x1:y0:y1:res"));
        if parts.len() != 5 {
            return Err(bad());
        }
        let f = |i: usize| parts[i].trim().parse::<f64>().map_err(|_| bad());
        let g = Grid {
            x0: f(0)?,
            x1: f(1)?,
            y0: f(2)?,
            y1: f(3)?,
            res: parts[4].trim().parse().map_err(|_| bad())?,
        };
        g.validate()?;
        Ok(g)
    }
}

/// One evaluated point of a joint region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub delta1: f64,
    pub delta2: f64,
    pub statistic: f64,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub level: f64,
    pub threshold: f64,
    /// The exact estimate, always a member.
    pub estimate: RegionPoint,
    /// Row-major over `delta2` then `delta1`.
    pub nodes: Vec<RegionPoint>,
}

impl RegionGrid {
    pub fn member_count(&self) -> usize {
        self.nodes.iter().filter(|p| p.member).count()
    }
}

/// Membership of grid nodes in the joint JEL confidence region.
pub fn joint_region_grid(
    first: &BivariateSample,
    second: &BivariateSample,
    level: f64,
    grid: &Grid,
    adjusted: bool,
) -> Result<RegionGrid> {
    check_level(level)?;
    grid.validate()?;
    let t = TwoSampleTest::new(first, second, adjusted)?;
    let threshold = chisq_quantile(level, 2.0)?;
    let point = |d1: f64, d2: f64| -> Result<RegionPoint> {
        let statistic = t.statistic([d1, d2])?;
        Ok(RegionPoint {
            delta1: d1,
            delta2: d2,
            statistic,
            member: statistic <= threshold,
        })
    };
    let est = t.estimate()?;
    let estimate = point(est[0], est[1])?;
    let xs = grid.axis(grid.x0, grid.x1);
    let ys = grid.axis(grid.y0, grid.y1);
    let nodes = ys
        .iter()
        .flat_map(|&d2| xs.iter().map(move |&d1| (d1, d2)))
        .map(|(d1, d2)| point(d1, d2))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid {
        level,
        threshold,
        estimate,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, v_gamma_normal, DistributionSpec, ScatterSpec};

    fn s4() -> BivariateSample {
        BivariateSample::new([(1., 2.), (2., 1.), (3., 4.), (4., 3.)]).unwrap()
    }

    fn normal(rho: f64, n: usize, seed: u64) -> BivariateSample {
        sample(
            &DistributionSpec::normal(ScatterSpec::correlation(rho).unwrap()),
            n,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn jel_interval_contains_point_and_hits_threshold() {
        let s = normal(0.5, 80, 1);
        for target in [Target::GammaXy, Target::GammaYx, Target::Delta] {
            for adjusted in [false, true] {
                let ci = ci_jel(&s, target, 0.9, adjusted).unwrap();
                assert!(ci.lower <= ci.point && ci.point <= ci.upper);
                let p = ScalarProfile::new(&s, target, adjusted).unwrap();
                let q = chisq_quantile(0.9, 1.0).unwrap();
                for (end, clipped) in [(ci.lower, ci.lower_clipped), (ci.upper, ci.upper_clipped)] {
                    if !clipped {
                        assert!(
                            (p.statistic(end).unwrap() - q).abs() < 1e-6,
                            "{target} {end}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn levels_share_a_scan() {
        let s = normal(0.3, 60, 2);
        let v = ci_jel_levels(&s, Target::GammaXy, &[0.9, 0.95], false).unwrap();
        assert_eq!(v[0], ci_jel(&s, Target::GammaXy, 0.9, false).unwrap());
        assert!(v[1].lower <= v[0].lower && v[0].upper <= v[1].upper);
    }

    #[test]
    fn level_and_size_checks() {
        let s = normal(0.3, 60, 2);
        assert!(ci_jel(&s, Target::GammaXy, 0.4, false).is_err());
        assert!(ci_jel(&s, Target::GammaXy, 1.0, false).is_err());
        assert!(matches!(
            ci_jel(&s4(), Target::GammaXy, 0.9, false),
            Err(Error::SampleTooSmall { .. })
        ));
        assert!(matches!(
            ci_jel(&s, Target::Pearson, 0.9, false),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn jackknife_interval_width() {
        let s = normal(0.5, 50, 3);
        let ci = ci_normal_jackknife(&s, Target::GammaXy, 0.9).unwrap();
        let v = jackknife_variance_of(&s, Target::GammaXy).unwrap();
        assert!((ci.length() - 2.0 * 1.6448536269514722 * v.sqrt()).abs() < 1e-12);
        let slow = crate::jackknife::jackknife_variance(pearson_r, &s).unwrap();
        assert!(
            (jackknife_variance_of(&s, Target::Pearson).unwrap() - slow).abs()
                < 1e-12 * slow.max(1e-3)
        );
    }

    #[test]
    fn asymptotic_interval_width() {
        let s = normal(0.0, 100, 4);
        let ci =
            ci_normal_asymptotic(&s, Target::GammaXy, 0.95, v_gamma_normal(0.0).unwrap()).unwrap();
        // 2 * 1.959964 * sqrt(pi / 300)
        assert!((ci.length() - 0.4011367).abs() < 1e-6);
        let ci = ci_normal_asymptotic(&s, Target::GammaXy, 0.95, 0.0).unwrap();
        assert_eq!(ci.lower, ci.upper);
        assert!(matches!(
            ci_normal_asymptotic(&s, Target::GammaXy, 0.95, -1.0),
            Err(Error::NegativeVariance(_))
        ));
    }

    #[test]
    fn pearson_variances() {
        let big = normal(0.5, 100_000, 5);
        let vp = pearson_variance_moments(&big).unwrap();
        assert!((vp / 0.5625 - 1.0).abs() < 0.05, "{vp}");
        let s = normal(0.0, 40, 6);
        let r = pearson_r(&s).unwrap();
        let ci = ci_pearson(&s, 0.9, PearsonVariance::ClosedFormNormal).unwrap();
        let want = 2.0 * 1.6448536269514722 * ((1.0 - r * r).powi(2) / 40.0).sqrt();
        assert!((ci.length() - want).abs() < 1e-12);
        let ci = ci_pearson(&s, 0.9, PearsonVariance::Supplied(1.0)).unwrap();
        assert!((ci.length() - 2.0 * 1.6448536269514722 / 40f64.sqrt()).abs() < 1e-12);
        assert!(
            ci_pearson(&s, 0.9, PearsonVariance::Jackknife)
                .unwrap()
                .length()
                > 0.0
        );
    }

    #[test]
    fn equality_test_examples() {
        let s5 = BivariateSample::new([(1., 2.), (2., 1.), (3., 4.), (4., 3.), (5., 5.)]).unwrap();
        assert_eq!(estimate(&s5, Target::Delta).unwrap(), 0.0);
        let t = test_equality(&s5, false).unwrap();
        assert!(t.statistic >= 0.0 && t.p_value > 0.5, "{t:?}");
        assert!(!t.reject_at["0.05"]);
        let profile = ScalarProfile::new(&s5, Target::Delta, false).unwrap();
        assert!(profile.statistic(profile.center).unwrap() < 1e-12);
    }

    #[test]
    fn equality_test_agrees_with_interval() {
        for seed in 0..20 {
            let d = DistributionSpec::normal_lognormal(ScatterSpec::new(4.0, 1.8, 1.0).unwrap());
            let s = sample(&d, 60, seed).unwrap();
            let t = test_equality(&s, false).unwrap();
            let ci = ci_jel(&s, Target::Delta, 0.9, false).unwrap();
            assert_eq!(t.rejects(0.10).unwrap(), !ci.contains(0.0), "seed {seed}");
        }
    }

    #[test]
    fn two_sample_examples() {
        let s = normal(0.5, 30, 7);
        let t = test_two_sample(&s, &s, false).unwrap();
        assert!(t.statistic.abs() < 1e-12 && (t.p_value - 1.0).abs() < 1e-12);
        assert_eq!(t.df, 2);
        assert!(t.warning.is_none());
        let small = normal(0.5, 6, 8);
        let big = normal(0.5, 100, 9);
        assert!(test_two_sample(&small, &big, false)
            .unwrap()
            .warning
            .is_some());
    }

    #[test]
    fn region_grid_properties() {
        let a = normal(0.5, 60, 10);
        let b = normal(0.2, 70, 11);
        let g: Grid = "-1:1:-1:1:21".parse().unwrap();
        let r90 = joint_region_grid(&a, &b, 0.90, &g, false).unwrap();
        let r95 = joint_region_grid(&a, &b, 0.95, &g, false).unwrap();
        assert_eq!(r90.nodes.len(), 441);
        assert!(r90.estimate.member && r90.estimate.statistic.abs() < 1e-9);
        assert!(r90.member_count() <= r95.member_count());
        assert!(r90.member_count() > 0);
        assert!("1:0:0:1:5".parse::<Grid>().is_err());
        assert!("-3:0:0:1:5".parse::<Grid>().is_err());
        assert!("0:1:0:1:1".parse::<Grid>().is_err());
        assert!("0:1:0:1".parse::<Grid>().is_err());
    }
}
