//! Monte Carlo studies: interval coverage, the equality test, and the
//! two-sample joint test.
//!
//! A study runs `repeats` blocks of `replications` samples. Replication `r`
//! of block `k` draws from stream `k * replications + r` of the base seed, so
//! results do not depend on the number of worker threads. Per-block
//! aggregates are summarised by their mean and standard deviation across
//! blocks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    replication_rng, sample_with_rng, v_gamma_monte_carlo, v_gamma_normal, DistributionSpec, Family,
};
use crate::error::{Error, Result};
use crate::inference::{
    ci_jel_levels, ci_normal_asymptotic, ci_normal_jackknife, ci_pearson, test_equality,
    IntervalEstimate, Method, PearsonVariance, Target, TwoSampleTest,
};
use crate::kernels::BivariateSample;
use crate::special::{chisq_quantile, chisq_sf};
use crate::ustat::Orientation;

/// Largest tolerated share of failed replications in a cell.
pub const FAILURE_GUARD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Coverage,
    Equality,
    TwoSample,
}

/// Known parameter values; missing entries are derived from the
/// distribution when a closed form exists.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truth {
    pub gamma_xy: Option<f64>,
    pub gamma_yx: Option<f64>,
    pub delta: Option<f64>,
    pub pearson: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
}

fn default_levels() -> Vec<f64> {
    vec![0.90, 0.95]
}
fn default_replications() -> usize {
    500
}
fn default_repeats() -> usize {
    5
}
fn default_mc_outer() -> usize {
    10_000
}
fn default_mc_inner() -> usize {
    1_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub dist: DistributionSpec,
    /// Second population, two-sample studies only.
    #[serde(default)]
    pub dist2: Option<DistributionSpec>,
    pub n: usize,
    #[serde(default)]
    pub n2: Option<usize>,
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub truth: Truth,
    /// Asymptotic variance for `asymptotic_normal`; derived when absent.
    #[serde(default)]
    pub asymptotic_variance: Option<f64>,
    #[serde(default = "default_mc_outer")]
    pub mc_outer: usize,
    #[serde(default = "default_mc_inner")]
    pub mc_inner: usize,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<document>".into());
            invalid(&key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn effective_targets(&self) -> Vec<Target> {
        if !self.targets.is_empty() {
            return self.targets.clone();
        }
        match self.kind {
            StudyKind::Coverage => vec![Target::GammaXy, Target::GammaYx],
            StudyKind::Equality => vec![Target::Delta],
            StudyKind::TwoSample => vec![],
        }
    }

    fn effective_methods(&self) -> Vec<Method> {
        if !self.methods.is_empty() {
            return self.methods.clone();
        }
        match self.kind {
            StudyKind::Coverage => vec![
                Method::Jel,
                Method::Ajel,
                Method::JackknifeNormal,
                Method::AsymptoticNormal,
            ],
            StudyKind::Equality => vec![Method::Jel, Method::Ajel, Method::JackknifeNormal],
            StudyKind::TwoSample => vec![Method::Jel, Method::Ajel],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if self.repeats < 1 {
            return Err(invalid("repeats", "must be at least 1"));
        }
        if self.levels.is_empty() {
            return Err(invalid("levels", "at least one level is required"));
        }
        for &l in &self.levels {
            if !(l > 0.5 && l < 1.0) {
                return Err(invalid("levels", format!("{l} is not in (0.5, 1)")));
            }
        }
        self.dist
            .validate()
            .map_err(|e| invalid("dist", e.to_string()))?;
        if self.n < 5 {
            return Err(invalid("n", "must be at least 5"));
        }
        if self.mc_outer < 100 || self.mc_inner < 100 {
            return Err(invalid(
                "mc_outer",
                "Monte Carlo sizes must be at least 100",
            ));
        }
        if let Some(v) = self.asymptotic_variance {
            if !(v >= 0.0) {
                return Err(invalid("asymptotic_variance", "must be non-negative"));
            }
        }
        match self.kind {
            StudyKind::TwoSample => {
                let d2 = self
                    .dist2
                    .ok_or_else(|| invalid("dist2", "required for two_sample studies"))?;
                d2.validate().map_err(|e| invalid("dist2", e.to_string()))?;
                if self.n2.is_some_and(|n2| n2 < 5) {
                    return Err(invalid("n2", "must be at least 5"));
                }
                for m in self.effective_methods() {
                    if !matches!(m, Method::Jel | Method::Ajel) {
                        return Err(invalid(
                            "methods",
                            format!("`{m}` is not available for two_sample"),
                        ));
                    }
                }
            }
            StudyKind::Coverage | StudyKind::Equality => {
                if self.dist2.is_some() || self.n2.is_some() {
                    let key = if self.dist2.is_some() { "dist2" } else { "n2" };
                    return Err(invalid(key, "only used by two_sample studies"));
                }
                if self.kind == StudyKind::Equality
                    && self.effective_targets().iter().any(|&t| t != Target::Delta)
                {
                    return Err(invalid("targets", "equality studies use the delta target"));
                }
                if self.cells().is_empty() {
                    return Err(invalid(
                        "methods",
                        "no method applies to the chosen targets",
                    ));
                }
            }
        }
        Ok(())
    }

    /// `(target, method)` pairs evaluated by coverage and equality studies.
    fn cells(&self) -> Vec<(Target, Method)> {
        let mut out = Vec::new();
        for t in self.effective_targets() {
            for m in self.effective_methods() {
                let ok = match (t, m) {
                    (Target::Pearson, Method::Pearson | Method::JackknifeNormal) => true,
                    (Target::Pearson, _) | (_, Method::Pearson) => false,
                    _ => true,
                };
                if ok {
                    out.push((t, m));
                }
            }
        }
        out
    }

    fn second_size(&self) -> usize {
        self.n2.unwrap_or(self.n)
    }
}

/// Mean and standard deviation across repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub target: Target,
    pub method: Method,
    pub level: f64,
    /// `None` when the failure guard tripped for this cell.
    pub coverage: Option<Summary>,
    pub length: Option<Summary>,
    pub failures: usize,
    pub clipped: usize,
    pub non_monotone: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionRate {
    pub level: f64,
    pub alpha: f64,
    pub rate: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub method: Method,
    pub mean_p: Option<Summary>,
    /// Share of replications rejecting the null at `alpha = 1 - level`.
    pub rejection: Vec<RejectionRate>,
    /// Share of joint regions containing the true differences (two-sample).
    pub coverage: Vec<RejectionRate>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub n: usize,
    pub n2: Option<usize>,
    pub replications: usize,
    pub repeats: usize,
    pub seed: u64,
    pub truth: BTreeMap<String, f64>,
    pub cells: Vec<CellReport>,
    pub tests: Vec<TestReport>,
    pub guard_tripped: bool,
}

/// One interval outcome: `(covered, length, clipped, non_monotone)`.
type IntervalOutcome = Option<(bool, f64, bool, bool)>;
/// One test outcome: `(p, reject per level, covered per level)`.
type TestOutcome = Option<(f64, Vec<bool>, Vec<bool>)>;

#[derive(Debug, Clone, Default)]
struct Replication {
    intervals: Vec<IntervalOutcome>,
    tests: Vec<TestOutcome>,
}

fn gamma_variance(cfg: &StudyConfig, orientation: Orientation) -> Result<f64> {
    if let Some(v) = cfg.asymptotic_variance {
        return Ok(v);
    }
    match cfg.dist.family {
        Family::Normal => v_gamma_normal(cfg.dist.scatter.rho()),
        _ => v_gamma_monte_carlo(&cfg.dist, orientation, cfg.mc_outer, cfg.mc_inner, cfg.seed),
    }
}

/// Everything fixed across replications.
struct Plan {
    cells: Vec<(Target, Method)>,
    truth: BTreeMap<Target, f64>,
    variance: BTreeMap<Target, f64>,
    pearson_variance: PearsonVariance,
}

impl Plan {
    fn new(cfg: &StudyConfig) -> Result<Self> {
        let cells = cfg.cells();
        let (gxy, gyx) = cfg.dist.gini_pair()?;
        let t = cfg.truth;
        let mut truth = BTreeMap::new();
        let gxy = t.gamma_xy.unwrap_or(gxy);
        let gyx = t.gamma_yx.unwrap_or(gyx);
        truth.insert(Target::GammaXy, gxy);
        truth.insert(Target::GammaYx, gyx);
        truth.insert(Target::Delta, t.delta.unwrap_or(gxy - gyx));
        let elliptical = matches!(cfg.dist.family, Family::Normal | Family::T { .. });
        match (t.pearson, elliptical) {
            (Some(p), _) => {
                truth.insert(Target::Pearson, p);
            }
            (None, true) => {
                truth.insert(Target::Pearson, cfg.dist.scatter.rho());
            }
            (None, false) => {
                if cells.iter().any(|c| c.0 == Target::Pearson) {
                    return Err(invalid(
                        "truth",
                        "pearson truth is required for this family",
                    ));
                }
            }
        }
        let mut variance = BTreeMap::new();
        for &(target, method) in &cells {
            if method != Method::AsymptoticNormal || variance.contains_key(&target) {
                continue;
            }
            let v = match target {
                Target::GammaXy => gamma_variance(cfg, Orientation::Xy)?,
                Target::GammaYx => gamma_variance(cfg, Orientation::Yx)?,
                _ => cfg.asymptotic_variance.ok_or_else(|| {
                    invalid(
                        "asymptotic_variance",
                        format!("required for asymptotic_normal on {target}"),
                    )
                })?,
            };
            variance.insert(target, v);
        }
        let pearson_variance = if cfg.dist.family == Family::Normal {
            PearsonVariance::ClosedFormNormal
        } else {
            PearsonVariance::Moments
        };
        Ok(Self {
            cells,
            truth,
            variance,
            pearson_variance,
        })
    }

    fn intervals(
        &self,
        s: &BivariateSample,
        target: Target,
        method: Method,
        levels: &[f64],
    ) -> Result<Vec<IntervalEstimate>> {
        match method {
            Method::Jel | Method::Ajel => ci_jel_levels(s, target, levels, method == Method::Ajel),
            Method::JackknifeNormal => levels
                .iter()
                .map(|&l| ci_normal_jackknife(s, target, l))
                .collect(),
            Method::AsymptoticNormal => levels
                .iter()
                .map(|&l| ci_normal_asymptotic(s, target, l, self.variance[&target]))
                .collect(),
            Method::Pearson => levels
                .iter()
                .map(|&l| ci_pearson(s, l, self.pearson_variance))
                .collect(),
        }
    }
}

fn run_indexed<F>(cfg: &StudyConfig, f: F) -> Vec<Replication>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Replication + Sync,
{
    let total = cfg.replications * cfg.repeats;
    (0..total)
        .into_par_iter()
        .map(|i| f(&mut replication_rng(cfg.seed, i as u64)))
        .collect()
}

fn one_sample_replication(
    cfg: &StudyConfig,
    plan: &Plan,
    rng: &mut rand_chacha::ChaCha8Rng,
    with_tests: bool,
) -> Replication {
    let levels = &cfg.levels;
    let Ok(s) = sample_with_rng(&cfg.dist, cfg.n, rng) else {
        return Replication {
            intervals: vec![None; plan.cells.len() * levels.len()],
            tests: vec![None; if with_tests { 2 } else { 0 }],
        };
    };
    let mut intervals = Vec::with_capacity(plan.cells.len() * levels.len());
    for &(target, method) in &plan.cells {
        let truth = plan.truth[&target];
        match plan.intervals(&s, target, method, levels) {
            Ok(cis) => intervals.extend(cis.iter().map(|ci| {
                Some((
                    ci.contains(truth),
                    ci.length(),
                    ci.lower_clipped || ci.upper_clipped,
                    ci.non_monotone,
                ))
            })),
            Err(_) => intervals.extend(std::iter::repeat_n(None, levels.len())),
        }
    }
    let mut tests = Vec::new();
    if with_tests {
        for adjusted in [false, true] {
            tests.push(test_equality(&s, adjusted).ok().map(|t| {
                let rejects = levels
                    .iter()
                    .map(|&l| t.rejects(1.0 - l).unwrap_or(false))
                    .collect();
                (t.p_value, rejects, Vec::new())
            }));
        }
    }
    Replication { intervals, tests }
}

fn aggregate_intervals(
    cfg: &StudyConfig,
    cells: &[(Target, Method)],
    reps: &[Replication],
) -> (Vec<CellReport>, bool) {
    let levels = &cfg.levels;
    let r = cfg.replications;
    let mut tripped = false;
    let mut out = Vec::new();
    for (ci, &(target, method)) in cells.iter().enumerate() {
        for (li, &level) in levels.iter().enumerate() {
            let idx = ci * levels.len() + li;
            let (mut failures, mut clipped, mut non_monotone) = (0, 0, 0);
            let mut cov = Vec::with_capacity(cfg.repeats);
            let mut len = Vec::with_capacity(cfg.repeats);
            for block in reps.chunks(r) {
                let (mut hit, mut total, mut length) = (0usize, 0usize, 0.0);
                for rep in block {
                    match rep.intervals[idx] {
                        Some((c, l, cl, nm)) => {
                            hit += c as usize;
                            total += 1;
                            length += l;
                            clipped += cl as usize;
                            non_monotone += nm as usize;
                        }
                        None => failures += 1,
                    }
                }
                if total > 0 {
                    cov.push(hit as f64 / total as f64);
                    len.push(length / total as f64);
                }
            }
            let guard =
                failures as f64 > FAILURE_GUARD * (r * cfg.repeats) as f64 || cov.is_empty();
            tripped |= guard;
            out.push(CellReport {
                target,
                method,
                level,
                coverage: (!guard).then(|| Summary::of(&cov)),
                length: (!guard).then(|| Summary::of(&len)),
                failures,
                clipped,
                non_monotone,
            });
        }
    }
    (out, tripped)
}

fn aggregate_tests(
    cfg: &StudyConfig,
    methods: &[Method],
    reps: &[Replication],
) -> (Vec<TestReport>, bool) {
    let levels = &cfg.levels;
    let r = cfg.replications;
    let mut tripped = false;
    let mut out = Vec::new();
    for (ti, &method) in methods.iter().enumerate() {
        let mut failures = 0;
        let mut mean_p = Vec::new();
        let mut rej = vec![Vec::new(); levels.len()];
        let mut cov = vec![Vec::new(); levels.len()];
        for block in reps.chunks(r) {
            let ok: Vec<&(f64, Vec<bool>, Vec<bool>)> = block
                .iter()
                .filter_map(|rep| rep.tests[ti].as_ref())
                .collect();
            failures += block.len() - ok.len();
            if ok.is_empty() {
                continue;
            }
            let k = ok.len() as f64;
            mean_p.push(ok.iter().map(|o| o.0).sum::<f64>() / k);
            for li in 0..levels.len() {
                rej[li].push(ok.iter().filter(|o| o.1[li]).count() as f64 / k);
                if !ok[0].2.is_empty() {
                    cov[li].push(ok.iter().filter(|o| o.2[li]).count() as f64 / k);
                }
            }
        }
        let guard = failures as f64 > FAILURE_GUARD * (r * cfg.repeats) as f64 || mean_p.is_empty();
        tripped |= guard;
        let rates = |v: &[Vec<f64>]| -> Vec<RejectionRate> {
            if guard {
                return Vec::new();
            }
            levels
                .iter()
                .zip(v)
                .filter(|(_, x)| !x.is_empty())
                .map(|(&level, x)| RejectionRate {
                    level,
                    alpha: 1.0 - level,
                    rate: Summary::of(x),
                })
                .collect()
        };
        out.push(TestReport {
            method,
            mean_p: (!guard).then(|| Summary::of(&mean_p)),
            rejection: rates(&rej),
            coverage: rates(&cov),
            failures,
        });
    }
    (out, tripped)
}

fn truth_map(entries: impl IntoIterator<Item = (String, f64)>) -> BTreeMap<String, f64> {
    entries.into_iter().collect()
}

fn report(
    cfg: &StudyConfig,
    truth: BTreeMap<String, f64>,
    cells: Vec<CellReport>,
    tests: Vec<TestReport>,
    guard: bool,
) -> StudyReport {
    StudyReport {
        kind: cfg.kind,
        n: cfg.n,
        n2: cfg.n2,
        replications: cfg.replications,
        repeats: cfg.repeats,
        seed: cfg.seed,
        truth,
        cells,
        tests,
        guard_tripped: guard,
    }
}

fn expect_kind(cfg: &StudyConfig, kind: StudyKind) -> Result<()> {
    cfg.validate()?;
    if cfg.kind == kind {
        Ok(())
    } else {
        Err(invalid(
            "kind",
            format!("expected {kind:?}, found {:?}", cfg.kind),
        ))
    }
}

/// Coverage and mean length of every requested interval method.
pub fn run_coverage_study(cfg: &StudyConfig) -> Result<StudyReport> {
    expect_kind(cfg, StudyKind::Coverage)?;
    let plan = Plan::new(cfg)?;
    let reps = run_indexed(cfg, |rng| one_sample_replication(cfg, &plan, rng, false));
    let (cells, guard) = aggregate_intervals(cfg, &plan.cells, &reps);
    let truth = truth_map(plan.truth.iter().map(|(t, v)| (t.to_string(), *v)));
    Ok(report(cfg, truth, cells, Vec::new(), guard))
}

/// Intervals for `Delta` at its true value, plus mean p-values and rejection
/// rates of the equality test (`Delta = 0`) with and without adjustment.
pub fn run_equality_study(cfg: &StudyConfig) -> Result<StudyReport> {
    expect_kind(cfg, StudyKind::Equality)?;
    let plan = Plan::new(cfg)?;
    let reps = run_indexed(cfg, |rng| one_sample_replication(cfg, &plan, rng, true));
    let (cells, g1) = aggregate_intervals(cfg, &plan.cells, &reps);
    let (tests, g2) = aggregate_tests(cfg, &[Method::Jel, Method::Ajel], &reps);
    let truth = truth_map([("delta".to_string(), plan.truth[&Target::Delta])]);
    Ok(report(cfg, truth, cells, tests, g1 || g2))
}

/// Mean p-values and rejection rates of the joint test at `(0, 0)`, and the
/// coverage of the true differences by the joint region.
pub fn run_two_sample_study(cfg: &StudyConfig) -> Result<StudyReport> {
    expect_kind(cfg, StudyKind::TwoSample)?;
    let d2 = cfg.dist2.ok_or_else(|| invalid("dist2", "required"))?;
    let (a1, a2) = cfg.dist.gini_pair()?;
    let (b1, b2) = d2.gini_pair()?;
    let true_delta = [
        cfg.truth.delta1.unwrap_or(a1 - b1),
        cfg.truth.delta2.unwrap_or(a2 - b2),
    ];
    let methods = cfg.effective_methods();
    let quantiles = cfg
        .levels
        .iter()
        .map(|&l| chisq_quantile(l, 2.0))
        .collect::<Result<Vec<_>>>()?;
    let n2 = cfg.second_size();
    let reps = run_indexed(cfg, |rng| {
        let samples = sample_with_rng(&cfg.dist, cfg.n, rng)
            .and_then(|s1| Ok((s1, sample_with_rng(&d2, n2, rng)?)));
        let tests = methods
            .iter()
            .map(|&m| {
                let (s1, s2) = samples.as_ref().ok()?;
                let t = TwoSampleTest::new(s1, s2, m == Method::Ajel).ok()?;
                let at_null = t.statistic([0.0, 0.0]).ok()?;
                let at_truth = t.statistic(true_delta).ok()?;
                let p = chisq_sf(at_null, 2.0).ok()?;
                Some((
                    p,
                    quantiles.iter().map(|&q| at_null > q).collect(),
                    quantiles.iter().map(|&q| at_truth <= q).collect(),
                ))
            })
            .collect();
        Replication {
            intervals: Vec::new(),
            tests,
        }
    });
    let (tests, guard) = aggregate_tests(cfg, &methods, &reps);
    let truth = truth_map([
        ("delta1".to_string(), true_delta[0]),
        ("delta2".to_string(), true_delta[1]),
    ]);
    Ok(report(cfg, truth, Vec::new(), tests, guard))
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    match cfg.kind {
        StudyKind::Coverage => run_coverage_study(cfg),
        StudyKind::Equality => run_equality_study(cfg),
        StudyKind::TwoSample => run_two_sample_study(cfg),
    }
}

/// Three decimals with the leading zero dropped: `.950`, `-.031`, `1.000`.
pub fn fmt3(x: f64) -> String {
    let s = format!("{x:.3}");
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

fn fmt_summary(s: Option<Summary>) -> String {
    match s {
        Some(s) => format!("{}({})", fmt3(s.mean), fmt3(s.sd)),
        None => "guard".to_string(),
    }
}

impl StudyReport {
    /// Aligned text table: one row per target and method, one column per
    /// level holding `coverage(sd) length(sd)`; test rows hold the mean
    /// p-value and rejection rates.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:?} study: n={}{} replications={} repeats={} seed={}",
            self.kind,
            self.n,
            self.n2.map(|v| format!(" n2={v}")).unwrap_or_default(),
            self.replications,
            self.repeats,
            self.seed
        );
        let truth: Vec<String> = self
            .truth
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt3(*v)))
            .collect();
        let _ = writeln!(out, "truth: {}", truth.join(" "));
        if !self.cells.is_empty() {
            let mut level_list: Vec<f64> = Vec::new();
            for c in &self.cells {
                if !level_list.contains(&c.level) {
                    level_list.push(c.level);
                }
            }
            let _ = write!(out, "{:<28}", "target/method");
            for l in &level_list {
                let _ = write!(out, "{:<26}", format!("1-a={l:.2} CovProb Length"));
            }
            out.push('\n');
            for chunk in self.cells.chunks(level_list.len()) {
                let c0 = &chunk[0];
                let _ = write!(out, "{:<28}", format!("{}/{}", c0.target, c0.method));
                for c in chunk {
                    let _ = write!(
                        out,
                        "{:<26}",
                        format!("{} {}", fmt_summary(c.coverage), fmt_summary(c.length))
                    );
                }
                if chunk.iter().any(|c| c.failures > 0) {
                    let f: usize = chunk.iter().map(|c| c.failures).sum();
                    let _ = write!(out, " failures={f}");
                }
                out.push('\n');
            }
        }
        for t in &self.tests {
            let _ = write!(out, "{:<28}", format!("test/{}", t.method));
            let _ = write!(out, "meanp {}", fmt_summary(t.mean_p));
            for r in &t.rejection {
                let _ = write!(out, "  reject@{:.2} {}", r.alpha, fmt_summary(Some(r.rate)));
            }
            for r in &t.coverage {
                let _ = write!(out, "  cover@{:.2} {}", r.level, fmt_summary(Some(r.rate)));
            }
            if t.failures > 0 {
                let _ = write!(out, "  failures={}", t.failures);
            }
            out.push('\n');
        }
        if self.guard_tripped {
            let _ = writeln!(
                out,
                "failure guard tripped: some cells exceed {FAILURE_GUARD} failed replications"
            );
        }
        out
    }
}
