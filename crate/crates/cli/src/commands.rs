use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use gini_jel::dataset::{Banknote, BanknoteClass, BanknoteVar, Table};
use gini_jel::distributions::{
    sample as draw, v_gamma_monte_carlo, v_gamma_normal, DistributionSpec, ScatterSpec,
};
use gini_jel::inference::{
    ci_jel, ci_normal_asymptotic, ci_normal_jackknife, ci_pearson, estimate, joint_region_grid,
    test_equality, test_two_sample, IntervalEstimate, Method, PearsonVariance, Target,
};
use gini_jel::simstudy::{run_study, StudyConfig};
use gini_jel::{BivariateSample, Error, Orientation};

use crate::args::{
    CiArgs, Command, DataArgs, Format, RegionArgs, SampleArgs, SimulateArgs, TestArgs, TestMode,
};
use crate::output::{fixed, to_json};
use crate::Failure;

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Ci(a) => cmd_ci(&a),
        Command::Test(a) => cmd_test(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Region(a) => cmd_region(&a),
        Command::Sample(a) => cmd_sample(&a),
    }
}

fn split_pair(cols: &str) -> Result<(&str, &str), Failure> {
    cols.split_once(',')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| Failure::Data(format!("--cols `{cols}` is not of the form i,j")))
}

fn banknote_vars(cols: Option<&str>) -> Result<(BanknoteVar, BanknoteVar), Failure> {
    let (a, b) = split_pair(cols.unwrap_or("vw,sw"))?;
    Ok((a.parse()?, b.parse()?))
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

/// The selected sample of one file.
fn load(data: &DataArgs) -> Result<BivariateSample, Failure> {
    match data.format {
        Format::TwoColumn => {
            let table = Table::read(&data.file)?;
            let (a, b) = split_pair(data.cols.as_deref().unwrap_or("0,1"))?;
            Ok(table.pair((table.column_index(a)?, table.column_index(b)?))?)
        }
        Format::Banknote => {
            let bank = Banknote::read(&data.file)?;
            if let Some(w) = &bank.warning {
                warn(w);
            }
            let class: BanknoteClass = data.class.parse()?;
            let (x, y) = banknote_vars(data.cols.as_deref())?;
            Ok(bank.pair(class, x, y)?)
        }
    }
}

/// Two samples: `--file` and `--file2`, or genuine and forgery of one
/// banknote file.
fn load_pair(
    data: &DataArgs,
    file2: Option<&PathBuf>,
) -> Result<(BivariateSample, BivariateSample), Failure> {
    match (file2, data.format) {
        (Some(f2), _) => {
            let second = DataArgs {
                file: f2.clone(),
                ..data.clone()
            };
            Ok((load(data)?, load(&second)?))
        }
        (None, Format::Banknote) => {
            let bank = Banknote::read(&data.file)?;
            if let Some(w) = &bank.warning {
                warn(w);
            }
            let (x, y) = banknote_vars(data.cols.as_deref())?;
            Ok((
                bank.pair(BanknoteClass::Genuine, x, y)?,
                bank.pair(BanknoteClass::Forgery, x, y)?,
            ))
        }
        (None, Format::TwoColumn) => Err(Failure::Data(
            "two-sample commands need --file2 or --format banknote".into(),
        )),
    }
}

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    gamma_xy: f64,
    gamma_yx: f64,
    delta: f64,
    pearson: f64,
    n: usize,
}

fn cmd_estimate(a: &DataArgs) -> CmdResult {
    let s = load(a)?;
    let report = EstimateReport {
        gamma_xy: estimate(&s, Target::GammaXy)?,
        gamma_yx: estimate(&s, Target::GammaYx)?,
        delta: estimate(&s, Target::Delta)?,
        pearson: estimate(&s, Target::Pearson)?,
        n: s.len(),
    };
    emit(&to_json(&report), None)
}

/// `normal`, `t:DF` (also `tDF`) or `normal_lognormal`, with the scatter
/// filled in later.
fn parse_family(s: &str, scatter: ScatterSpec) -> Result<DistributionSpec, Failure> {
    let s = s.trim().to_ascii_lowercase();
    let spec = match s.as_str() {
        "normal" => DistributionSpec::normal(scatter),
        "normal_lognormal" | "lognormal" => DistributionSpec::normal_lognormal(scatter),
        t if t.starts_with('t') => {
            let df: f64 = t[1..].trim_start_matches(':').parse().map_err(|_| {
                Failure::Data(format!("family `{s}` needs degrees of freedom, e.g. t:5"))
            })?;
            DistributionSpec::t(df, scatter)
        }
        _ => return Err(Failure::Data(format!("unknown family `{s}`"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn covariance(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let d = n - 1.0;
    (sxx / d, sxy / d, syy / d)
}

/// The family's scatter fitted by moments to the sample.
fn fitted_family(s: &BivariateSample, family: &str) -> Result<DistributionSpec, Failure> {
    let probe = parse_family(family, ScatterSpec::new(1.0, 0.0, 1.0)?)?;
    let (c11, c12, c22) = match probe.family {
        gini_jel::distributions::Family::NormalLognormal => {
            if s.y().iter().any(|&v| v <= 0.0) {
                return Err(Failure::Data(
                    "normal_lognormal needs a positive second column".into(),
                ));
            }
            let logy: Vec<f64> = s.y().iter().map(|v| v.ln()).collect();
            covariance(s.x(), &logy)
        }
        gini_jel::distributions::Family::T { df } => {
            let (a, b, c) = covariance(s.x(), s.y());
            let k = (df - 2.0) / df;
            (a * k, b * k, c * k)
        }
        gini_jel::distributions::Family::Normal => covariance(s.x(), s.y()),
    };
    parse_family(family, ScatterSpec::new(c11, c12, c22)?)
}

fn asymptotic_variance(a: &CiArgs, s: &BivariateSample, target: Target) -> Result<f64, Failure> {
    if let Some(v) = a.variance {
        return Ok(v);
    }
    let family = a.family.as_deref().ok_or_else(|| {
        Failure::Data("the asymptotic method needs --variance or --family".into())
    })?;
    let orientation = match target {
        Target::GammaXy => Orientation::Xy,
        Target::GammaYx => Orientation::Yx,
        _ => {
            return Err(Failure::Data(format!(
                "no closed form or simulation for the {target} variance; pass --variance"
            )))
        }
    };
    let spec = fitted_family(s, family)?;
    match spec.family {
        gini_jel::distributions::Family::Normal => Ok(v_gamma_normal(spec.scatter.rho())?),
        _ => Ok(v_gamma_monte_carlo(
            &spec,
            orientation,
            a.reps,
            1_000,
            a.seed,
        )?),
    }
}

fn cmd_ci(a: &CiArgs) -> CmdResult {
    let s = load(&a.data)?;
    let method = if a.adjusted && a.method == Method::Jel {
        Method::Ajel
    } else {
        a.method
    };
    let target = a.target;
    let compatible = match (target, method) {
        (Target::Pearson, m) => matches!(m, Method::Pearson | Method::JackknifeNormal),
        (_, m) => m != Method::Pearson,
    };
    if !compatible {
        return Err(Failure::Data(format!(
            "method {method} is not available for target {target}"
        )));
    }
    let ci: IntervalEstimate = match method {
        Method::Jel | Method::Ajel => ci_jel(&s, target, a.level, method == Method::Ajel)?,
        Method::JackknifeNormal => ci_normal_jackknife(&s, target, a.level)?,
        Method::AsymptoticNormal => {
            let v = asymptotic_variance(a, &s, target)?;
            ci_normal_asymptotic(&s, target, a.level, v)?
        }
        Method::Pearson => {
            let variance = match (a.variance, a.family.as_deref()) {
                (Some(v), _) => PearsonVariance::Supplied(v),
                (None, Some(f)) if f.trim().eq_ignore_ascii_case("normal") => {
                    PearsonVariance::ClosedFormNormal
                }
                _ => PearsonVariance::Moments,
            };
            ci_pearson(&s, a.level, variance)?
        }
    };
    if ci.lower_clipped || ci.upper_clipped {
        warn("interval reaches the boundary of the parameter domain");
    }
    if ci.non_monotone {
        warn("likelihood ratio profile is not monotone on the scan grid");
    }
    emit(&to_json(&ci), None)
}

#[derive(Serialize)]
struct TestReport {
    mode: &'static str,
    estimate: Vec<f64>,
    n: Vec<usize>,
    #[serde(flatten)]
    result: gini_jel::inference::TestResult,
}

fn cmd_test(a: &TestArgs) -> CmdResult {
    let (mode, estimate_v, n, mut result) = match a.mode {
        TestMode::Equality => {
            if a.file2.is_some() {
                return Err(Failure::Data(
                    "the equality test takes a single file".into(),
                ));
            }
            let s = load(&a.data)?;
            (
                "equality",
                vec![estimate(&s, Target::Delta)?],
                vec![s.len()],
                test_equality(&s, a.adjusted)?,
            )
        }
        TestMode::TwoSample => {
            let (s1, s2) = load_pair(&a.data, a.file2.as_ref())?;
            let d = |t| -> Result<f64, Error> { Ok(estimate(&s1, t)? - estimate(&s2, t)?) };
            (
                "two_sample",
                vec![d(Target::GammaXy)?, d(Target::GammaYx)?],
                vec![s1.len(), s2.len()],
                test_two_sample(&s1, &s2, a.adjusted)?,
            )
        }
    };
    if let Some(level) = a.level {
        if !(level > 0.5 && level < 1.0) {
            return Err(Error::OutOfRange {
                name: "level",
                value: level,
            }
            .into());
        }
        let alpha = 1.0 - level;
        let key = format!("{alpha:.2}");
        let reject = result.rejects(alpha)?;
        result.reject_at.insert(key, reject);
    }
    if let Some(w) = &result.warning {
        warn(w);
    }
    emit(
        &to_json(&TestReport {
            mode,
            estimate: estimate_v,
            n,
            result,
        }),
        None,
    )
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let text = fs::read_to_string(&a.config).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            Failure::from(Error::FileNotFound(a.config.display().to_string()))
        }
        _ => Failure::from(e),
    })?;
    let mut cfg = StudyConfig::from_toml(&text)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(r) = a.reps {
        cfg.replications = r;
    }
    if let Some(k) = a.repeats {
        cfg.repeats = k;
    }
    cfg.validate()?;
    let report = run_study(&cfg)?;
    let table = report.to_text();
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), to_json(&report))?;
        fs::write(dir.join("report.txt"), &table)?;
    }
    let styled = std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal();
    let mut lines = table.lines();
    if let Some(first) = lines.next() {
        if styled {
            println!("\x1b[1m{first}\x1b[0m");
        } else {
            println!("{first}");
        }
    }
    for line in lines {
        println!("{line}");
    }
    if report.guard_tripped {
        return Err(Failure::Numerical(
            "more than 1% of replications failed in at least one cell".into(),
        ));
    }
    Ok(())
}

fn cmd_region(a: &RegionArgs) -> CmdResult {
    let (s1, s2) = load_pair(&a.data, a.file2.as_ref())?;
    let region = joint_region_grid(&s1, &s2, a.level, &a.grid, a.adjusted)?;
    let mut csv = String::from("delta1,delta2,member,point_estimate\n");
    let row = |p: &gini_jel::inference::RegionPoint, estimate: bool| {
        format!(
            "{},{},{},{}\n",
            fixed(p.delta1),
            fixed(p.delta2),
            u8::from(p.member),
            u8::from(estimate)
        )
    };
    for p in &region.nodes {
        csv += &row(p, false);
    }
    csv += &row(&region.estimate, true);
    emit(&csv, a.out.as_deref())
}

fn cmd_sample(a: &SampleArgs) -> CmdResult {
    let scatter = match &a.scatter {
        Some(text) => {
            let v: Vec<f64> = text
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::Data(format!("--scatter `{text}` is not s11,s12,s22")))?;
            if v.len() != 3 {
                return Err(Failure::Data(format!(
                    "--scatter `{text}` is not s11,s12,s22"
                )));
            }
            ScatterSpec::new(v[0], v[1], v[2])?
        }
        None => ScatterSpec::correlation(a.rho)?,
    };
    let spec = parse_family(&a.family, scatter)?;
    let s = draw(&spec, a.n, a.seed)?;
    let mut csv = String::from("x,y\n");
    for o in s.iter() {
        // Shortest round-trip representation keeps re-reading bitwise exact.
        csv += &format!("{},{}\n", o.x, o.y);
    }
    emit(&csv, a.out.as_deref())
}
