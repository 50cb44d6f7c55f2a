use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use gini_jel::distributions::{sample, DistributionSpec, ScatterSpec};
use gini_jel::inference::{estimate, Target};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gini-jel"))
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "status {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const S4: &str = "x,y\n1,2\n2,1\n3,4\n4,3\n";

/// Two small classes in the banknote layout.
fn banknote_file() -> PathBuf {
    let mut text = String::new();
    for i in 0..30 {
        let t = i as f64;
        text += &format!(
            "{},{},{},{},0\n",
            t,
            (t * 0.7).sin() * 3.0 + t * 0.2,
            t * t * 0.01,
            1.0 - t * 0.05
        );
    }
    for i in 0..25 {
        let t = i as f64;
        text += &format!(
            "{},{},{},{},1\n",
            -t,
            (t * 1.3).cos() * 2.0 - t * 0.4,
            t * 0.3,
            (t * 0.2).sin()
        );
    }
    write("bank.csv", &text)
}

#[test]
fn estimate_s4() {
    let f = write("s4.csv", S4);
    let v = json(&run(&["estimate", "--file", s(&f)]));
    assert_eq!(v["gamma_xy"].as_f64(), Some(0.6));
    assert_eq!(v["gamma_yx"].as_f64(), Some(0.6));
    assert_eq!(v["delta"].as_f64(), Some(0.0));
    assert_eq!(v["n"].as_u64(), Some(4));
    let text = String::from_utf8(run(&["estimate", "--file", s(&f)]).stdout).unwrap();
    assert!(text.contains("\"gamma_xy\": 0.600000"));
}

#[test]
fn data_errors_exit_two() {
    let empty = write("empty.csv", "");
    assert_eq!(
        run(&["estimate", "--file", s(&empty)]).status.code(),
        Some(2)
    );
    let bad = write("bad.csv", "1,2\n3,x\n");
    let out = run(&["estimate", "--file", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 2"));
    let missing = scratch("does-not-exist.csv");
    assert_eq!(
        run(&["estimate", "--file", s(&missing)]).status.code(),
        Some(2)
    );
}

#[test]
fn usage_errors_exit_one() {
    let f = write("s4u.csv", S4);
    assert_eq!(
        run(&["ci", "--file", s(&f), "--method", "bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn sampler_round_trip_is_bitwise() {
    let f = scratch("sample.csv");
    let out = run(&[
        "sample",
        "--family",
        "t:5",
        "--scatter",
        "1,1,4",
        "--n",
        "80",
        "--seed",
        "9",
        "--out",
        s(&f),
    ]);
    assert!(out.status.success());
    let spec = DistributionSpec::t(5.0, ScatterSpec::new(1.0, 1.0, 4.0).unwrap());
    let direct = sample(&spec, 80, 9).unwrap();
    let v = json(&run(&["estimate", "--file", s(&f)]));
    let g = estimate(&direct, Target::GammaXy).unwrap();
    // JSON carries six decimals; the file itself must reproduce the sample.
    assert!((v["gamma_xy"].as_f64().unwrap() - g).abs() < 5e-7);
    let table = gini_jel::dataset::Table::read(&f).unwrap();
    assert_eq!(table.pair((0, 1)).unwrap(), direct);
    // deterministic given the seed
    let again = scratch("sample2.csv");
    run(&[
        "sample",
        "--family",
        "t:5",
        "--scatter",
        "1,1,4",
        "--n",
        "80",
        "--seed",
        "9",
        "--out",
        s(&again),
    ]);
    assert_eq!(fs::read(&f).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn ci_methods() {
    let f = scratch("ci.csv");
    run(&[
        "sample",
        "--rho",
        "0.5",
        "--n",
        "100",
        "--seed",
        "2",
        "--out",
        s(&f),
    ]);
    for method in ["jel", "ajel", "jackknife"] {
        let v = json(&run(&[
            "ci",
            "--file",
            s(&f),
            "--method",
            method,
            "--level",
            "0.9",
        ]));
        let (lo, hi, p) = (
            v["lower"].as_f64().unwrap(),
            v["upper"].as_f64().unwrap(),
            v["point"].as_f64().unwrap(),
        );
        assert!(lo < p && p < hi, "{method}: {v}");
    }
    let v = json(&run(&[
        "ci",
        "--file",
        s(&f),
        "--method",
        "asymptotic",
        "--family",
        "normal",
    ]));
    assert_eq!(v["method"], "asymptotic_normal");
    let v = json(&run(&[
        "ci",
        "--file",
        s(&f),
        "--target",
        "pearson",
        "--method",
        "pearson",
        "--family",
        "normal",
    ]));
    assert_eq!(v["target"], "pearson");
    // asymptotic needs a variance source
    assert_eq!(
        run(&["ci", "--file", s(&f), "--method", "asymptotic"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "ci",
            "--file",
            s(&f),
            "--target",
            "delta",
            "--method",
            "pearson"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn comonotone_interval_is_clipped() {
    let f = write("s3.csv", "1,1\n2,2\n3,3\n4,4\n5,5\n6,6\n");
    let out = run(&["ci", "--file", s(&f), "--level", "0.9"]);
    let v = json(&out);
    assert_eq!(v["upper"].as_f64(), Some(1.0));
    assert_eq!(v["upper_clipped"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("boundary"));
}

#[test]
fn identical_samples_give_zero_statistic() {
    let f = scratch("same.csv");
    run(&[
        "sample",
        "--rho",
        "0.3",
        "--n",
        "40",
        "--seed",
        "5",
        "--out",
        s(&f),
    ]);
    let v = json(&run(&[
        "test",
        "two-sample",
        "--file",
        s(&f),
        "--file2",
        s(&f),
        "--level",
        "0.8",
    ]));
    assert_eq!(v["statistic"].as_f64(), Some(0.0));
    assert_eq!(v["p_value"].as_f64(), Some(1.0));
    assert_eq!(v["df"].as_u64(), Some(2));
    assert_eq!(v["reject_at"]["0.20"], false);
    let v = json(&run(&["test", "equality", "--file", s(&f)]));
    assert_eq!(v["df"].as_u64(), Some(1));
    assert_eq!(
        run(&["test", "two_sample", "--file", s(&f)]).status.code(),
        Some(2)
    );
}

#[test]
fn banknote_layout() {
    let f = banknote_file();
    let out = run(&[
        "estimate",
        "--file",
        s(&f),
        "--format",
        "banknote",
        "--class",
        "forgery",
        "--cols",
        "sw,kw",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 762 genuine"));
    assert_eq!(json(&out)["n"].as_u64(), Some(25));
    let v = json(&run(&[
        "test",
        "two-sample",
        "--file",
        s(&f),
        "--format",
        "banknote",
    ]));
    assert_eq!(v["n"][0].as_u64(), Some(30));
    assert_eq!(v["n"][1].as_u64(), Some(25));
}

#[test]
fn region_csv_contract() {
    let a = scratch("r1.csv");
    let b = scratch("r2.csv");
    run(&[
        "sample",
        "--rho",
        "0.5",
        "--n",
        "50",
        "--seed",
        "11",
        "--out",
        s(&a),
    ]);
    run(&[
        "sample",
        "--rho",
        "0.2",
        "--n",
        "40",
        "--seed",
        "12",
        "--out",
        s(&b),
    ]);
    let out = run(&[
        "region",
        "--file",
        s(&a),
        "--file2",
        s(&b),
        "--grid=-0.5:0.5:-0.5:0.5:2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta1,delta2,member,point_estimate");
    assert_eq!(lines.len(), 6);
    let last: Vec<&str> = lines[5].split(',').collect();
    assert_eq!((last[2], last[3]), ("1", "1"));
    assert!(lines[1].starts_with("-0.500000,-0.500000,"));
    assert!(lines[1].ends_with(",0"));
}

#[test]
fn simulate_smoke_and_config_errors() {
    let cfg = write(
        "smoke.toml",
        r#"
kind = "coverage"
n = 20
replications = 1
repeats = 1
seed = 3
levels = [0.9]
[dist]
family = "normal"
scatter = { s11 = 1.0, s12 = 1.0, s22 = 4.0 }
"#,
    );
    let dir = scratch("sim-out");
    let start = std::time::Instant::now();
    let out = run(&["simulate", s(&cfg), "--out", s(&dir)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["guard_tripped"], false);
    assert!(String::from_utf8_lossy(&out.stdout).contains("gamma_xy/jel"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains('\x1b'));

    let bad = write(
        "bad.toml",
        &fs::read_to_string(&cfg).unwrap().replace("[0.9]", "[1.5]"),
    );
    let out = run(&["simulate", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`levels`"));
}
