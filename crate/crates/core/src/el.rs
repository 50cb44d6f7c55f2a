//! Empirical likelihood for a zero mean: the Lagrange-multiplier dual for
//! scalar and two-dimensional estimating values, `-2 log R`, and the
//! adjusted-EL augmentation.
//!
//! Hull violations are an expected outcome when a candidate parameter is far
//! from the estimate. They surface as [`Error::HullViolation`] and
//! [`infinite_on_hull_violation`] turns them into a `+inf` statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCALAR_F_TOL: f64 = 1e-10;
pub const SCALAR_INTERVAL_TOL: f64 = 1e-14;
pub const SCALAR_MAX_ITER: usize = 200;
pub const VECTOR_GRAD_TOL: f64 = 1e-10;
pub const VECTOR_MAX_NEWTON: usize = 100;
pub const VECTOR_MAX_DESCENT: usize = 50;

/// Solution of the dual problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElSolution<L> {
    pub lambda: L,
    pub neg2_log_r: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// How `a_n` is chosen for the adjusted pseudo-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum AdjustmentRule {
    /// `max(1, ln(n) / 2)`.
    #[default]
    HalfLog,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct AdjustmentPolicy {
    pub enabled: bool,
    pub rule: AdjustmentRule,
}

impl AdjustmentPolicy {
    pub const OFF: Self = Self {
        enabled: false,
        rule: AdjustmentRule::HalfLog,
    };
    pub const HALF_LOG: Self = Self {
        enabled: true,
        rule: AdjustmentRule::HalfLog,
    };

    pub fn a_n(&self, n: usize) -> f64 {
        match self.rule {
            AdjustmentRule::HalfLog => (0.5 * (n as f64).ln()).max(1.0),
            AdjustmentRule::Fixed(a) => a,
        }
    }
}

/// Appends `-(a_n / n) * sum(values)`; `n` is the original length.
pub fn adjust_pseudo_values(values: &[f64], policy: AdjustmentPolicy) -> Vec<f64> {
    let mut out = values.to_vec();
    if policy.enabled && !values.is_empty() {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        out.push(-policy.a_n(n) * mean);
    }
    out
}

/// Vector analogue of [`adjust_pseudo_values`].
pub fn adjust_pseudo_rows(rows: &[[f64; 2]], policy: AdjustmentPolicy) -> Vec<[f64; 2]> {
    let mut out = rows.to_vec();
    if policy.enabled && !rows.is_empty() {
        let n = rows.len();
        let m = mean2(rows);
        let a = policy.a_n(n);
        out.push([-a * m[0], -a * m[1]]);
    }
    out
}

fn mean2(rows: &[[f64; 2]]) -> [f64; 2] {
    let n = rows.len() as f64;
    let s = rows
        .iter()
        .fold([0.0, 0.0], |a, r| [a[0] + r[0], a[1] + r[1]]);
    [s[0] / n, s[1] / n]
}

/// Maps a hull violation to `+inf`; other errors pass through.
pub fn infinite_on_hull_violation(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::HullViolation) => Ok(f64::INFINITY),
        other => other,
    }
}

fn check_finite(values: impl Iterator<Item = f64>) -> Result<()> {
    for (index, v) in values.enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

/// `(sum v/(1+lv), sum v^2/(1+lv)^2)`.
fn scalar_dual(values: &[f64], lambda: f64) -> (f64, f64) {
    values.iter().fold((0.0, 0.0), |(f, d), &v| {
        let r = v / (1.0 + lambda * v);
        (f + r, d + r * r)
    })
}

/// Root of `n^-1 sum v_i / (1 + lambda v_i) = 0` on `(-1/max v, -1/min v)`.
///
/// Newton steps are kept inside a bracket that shrinks on every evaluation,
/// so the iterate is always feasible.
pub fn solve_lambda_scalar(values: &[f64]) -> Result<ElSolution<f64>> {
    if values.is_empty() {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    check_finite(values.iter().copied())?;
    let (lo_v, hi_v) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if lo_v == 0.0 && hi_v == 0.0 {
        return Ok(ElSolution {
            lambda: 0.0,
            neg2_log_r: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    if lo_v >= 0.0 || hi_v <= 0.0 {
        return Err(Error::HullViolation);
    }
    let n = values.len() as f64;
    // f > 0 at `a`, f < 0 at `b`
    let mut a = -1.0 / hi_v;
    let mut b = -1.0 / lo_v;
    let mut lambda = 0.0;
    // the residual is scaled by |lambda| so that the implied weights sum to
    // one within the same tolerance
    for it in 1..=SCALAR_MAX_ITER {
        let (f, d) = scalar_dual(values, lambda);
        if (f / n).abs() * lambda.abs().max(1.0) < SCALAR_F_TOL || b - a < SCALAR_INTERVAL_TOL {
            return Ok(scalar_solution(values, lambda, it, true));
        }
        if f > 0.0 {
            a = lambda;
        } else {
            b = lambda;
        }
        let newton = lambda + f / d;
        lambda = if newton > a && newton < b && d > 0.0 {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    let (f, _) = scalar_dual(values, lambda);
    if (f / n).abs() * lambda.abs().max(1.0) < SCALAR_F_TOL || b - a < SCALAR_INTERVAL_TOL {
        Ok(scalar_solution(values, lambda, SCALAR_MAX_ITER, true))
    } else {
        Err(Error::NonConvergence {
            iterations: SCALAR_MAX_ITER,
        })
    }
}

fn scalar_solution(
    values: &[f64],
    lambda: f64,
    iterations: usize,
    converged: bool,
) -> ElSolution<f64> {
    let stat = 2.0 * values.iter().map(|&v| (lambda * v).ln_1p()).sum::<f64>();
    ElSolution {
        lambda,
        neg2_log_r: stat.max(0.0),
        iterations,
        converged,
    }
}

/// `-2 log R = 2 sum log(1 + lambda v_i)`.
pub fn neg2_log_r_scalar(values: &[f64]) -> Result<f64> {
    Ok(solve_lambda_scalar(values)?.neg2_log_r)
}

/// Implied weights `p_i = 1 / (n (1 + lambda v_i))`.
pub fn el_weights_scalar(values: &[f64], lambda: f64) -> Vec<f64> {
    let n = values.len() as f64;
    values
        .iter()
        .map(|&v| 1.0 / (n * (1.0 + lambda * v)))
        .collect()
}

pub fn el_weights_vector(rows: &[[f64; 2]], lambda: [f64; 2]) -> Vec<f64> {
    let n = rows.len() as f64;
    rows.iter()
        .map(|r| 1.0 / (n * (1.0 + lambda[0] * r[0] + lambda[1] * r[1])))
        .collect()
}

/// Rank test on the covariance of the rows, invariant to rescaling either
/// coordinate: singular when a variance vanishes or `1 - r^2 <= 1e-12`.
fn rows_singular(rows: &[[f64; 2]]) -> bool {
    if rows.len() < 2 {
        return true;
    }
    let m = mean2(rows);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for r in rows {
        let (dx, dy) = (r[0] - m[0], r[1] - m[1]);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return true;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    1.0 - r * r <= 1e-12
}

/// Zero is interior to the convex hull iff no open half-plane through the
/// origin misses every row, i.e. the largest angular gap between consecutive
/// non-zero row directions is below `pi`.
fn zero_interior_to_hull(rows: &[[f64; 2]]) -> bool {
    let mut angles: Vec<f64> = rows
        .iter()
        .filter(|r| r[0] != 0.0 || r[1] != 0.0)
        .map(|r| r[1].atan2(r[0]))
        .collect();
    if angles.len() < 3 {
        return false;
    }
    angles.sort_by(f64::total_cmp);
    let wrap = angles[0] + std::f64::consts::TAU - angles[angles.len() - 1];
    let max_gap = angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    max_gap < std::f64::consts::PI - 1e-12
}

struct VectorDual {
    objective: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

/// Objective `-sum log(1 + l'v)`, or `None` outside the feasible region.
fn vector_objective(rows: &[[f64; 2]], l: [f64; 2]) -> Option<f64> {
    let mut obj = 0.0;
    for r in rows {
        let t = l[0] * r[0] + l[1] * r[1];
        if 1.0 + t <= 0.0 {
            return None;
        }
        obj -= t.ln_1p();
    }
    Some(obj)
}

fn vector_dual(rows: &[[f64; 2]], l: [f64; 2]) -> VectorDual {
    let mut objective = 0.0;
    let mut grad = [0.0; 2];
    let mut hess = [[0.0; 2]; 2];
    for r in rows {
        let t = l[0] * r[0] + l[1] * r[1];
        objective -= t.ln_1p();
        let w = 1.0 + t;
        let (a, b) = (r[0] / w, r[1] / w);
        grad[0] -= a;
        grad[1] -= b;
        hess[0][0] += a * a;
        hess[0][1] += a * b;
        hess[1][1] += b * b;
    }
    hess[1][0] = hess[0][1];
    VectorDual {
        objective,
        grad,
        hess,
    }
}

fn newton_direction(d: &VectorDual) -> Option<[f64; 2]> {
    let [[a, b], [_, c]] = d.hess;
    let det = a * c - b * b;
    if !(det > 0.0) || !det.is_finite() {
        return None;
    }
    let [g0, g1] = d.grad;
    Some([-(c * g0 - b * g1) / det, -(a * g1 - b * g0) / det])
}

/// Largest `t` in `1, 1/2, 1/4, ...` keeping feasibility and not increasing
/// the objective.
fn backtrack(rows: &[[f64; 2]], l: [f64; 2], dir: [f64; 2], current: f64) -> Option<[f64; 2]> {
    let mut t = 1.0;
    for _ in 0..60 {
        let cand = [l[0] + t * dir[0], l[1] + t * dir[1]];
        if let Some(obj) = vector_objective(rows, cand) {
            if obj <= current {
                return Some(cand);
            }
        }
        t *= 0.5;
    }
    None
}

/// Damped Newton on the convex dual `-sum log(1 + lambda' v_i)`, with a
/// gradient-descent fallback.
pub fn solve_lambda_vector(rows: &[[f64; 2]]) -> Result<ElSolution<[f64; 2]>> {
    if rows.is_empty() {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    check_finite(rows.iter().flat_map(|r| r.iter().copied()))?;
    if rows.iter().all(|r| r[0] == 0.0 && r[1] == 0.0) {
        return Ok(ElSolution {
            lambda: [0.0, 0.0],
            neg2_log_r: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    if rows_singular(rows) {
        return Err(Error::SingularCovariance);
    }
    if !zero_interior_to_hull(rows) {
        return Err(Error::HullViolation);
    }
    let n = rows.len() as f64;
    // scaled by |lambda| as in the scalar solver
    let done = |d: &VectorDual, l: [f64; 2]| {
        d.grad[0].hypot(d.grad[1]) / n * l[0].hypot(l[1]).max(1.0) < VECTOR_GRAD_TOL
    };
    let finish = |l: [f64; 2], iterations: usize, d: &VectorDual| ElSolution {
        lambda: l,
        neg2_log_r: (-2.0 * d.objective).max(0.0),
        iterations,
        converged: true,
    };

    let mut l = [0.0, 0.0];
    let mut iterations = 0;
    for _ in 0..VECTOR_MAX_NEWTON {
        let d = vector_dual(rows, l);
        if done(&d, l) {
            return Ok(finish(l, iterations, &d));
        }
        iterations += 1;
        let Some(dir) = newton_direction(&d) else {
            break;
        };
        // Newton decrement below rounding: no further progress is possible
        let decrement = -(dir[0] * d.grad[0] + dir[1] * d.grad[1]);
        if decrement < 1e-24 * n {
            return Ok(finish(l, iterations, &d));
        }
        // inside the quadratic region the objective change is below rounding,
        // so the full step is taken on feasibility alone
        let step = if decrement < 1e-8 * n {
            let cand = [l[0] + dir[0], l[1] + dir[1]];
            vector_objective(rows, cand).map(|_| cand)
        } else {
            None
        };
        match step.or_else(|| backtrack(rows, l, dir, d.objective)) {
            Some(next) if next != l => l = next,
            _ => break,
        }
    }
    for _ in 0..VECTOR_MAX_DESCENT {
        let d = vector_dual(rows, l);
        if done(&d, l) {
            return Ok(finish(l, iterations, &d));
        }
        iterations += 1;
        let dir = [-d.grad[0] / n, -d.grad[1] / n];
        match backtrack(rows, l, dir, d.objective) {
            Some(next) if next != l => l = next,
            _ => break,
        }
    }
    let d = vector_dual(rows, l);
    if done(&d, l) {
        Ok(finish(l, iterations, &d))
    } else {
        Err(Error::NonConvergence { iterations })
    }
}

pub fn neg2_log_r_vector(rows: &[[f64; 2]]) -> Result<f64> {
    Ok(solve_lambda_vector(rows)?.neg2_log_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_examples() {
        let s = solve_lambda_scalar(&[-1.0, 2.0]).unwrap();
        assert!((s.lambda - 0.25).abs() < 1e-12);
        assert!((s.neg2_log_r - 2.0 * (0.75f64.ln() + 1.5f64.ln())).abs() < 1e-12);
        assert!((s.neg2_log_r - 0.235566).abs() < 1e-6);
        let s = solve_lambda_scalar(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.lambda, 0.0);
        assert_eq!(s.neg2_log_r, 0.0);
        assert_eq!(
            solve_lambda_scalar(&[1.0, 2.0, 3.0]),
            Err(Error::HullViolation)
        );
        assert_eq!(solve_lambda_scalar(&[0.0, 2.0]), Err(Error::HullViolation));
        assert_eq!(neg2_log_r_scalar(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            infinite_on_hull_violation(neg2_log_r_scalar(&[-1.0, -2.0])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn vector_examples() {
        let sym = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];
        let s = solve_lambda_vector(&sym).unwrap();
        assert_eq!(s.lambda, [0.0, 0.0]);
        assert_eq!(s.neg2_log_r, 0.0);
        let dec = [[-1.0, 0.0], [2.0, 0.0], [0.0, -1.0], [0.0, 2.0]];
        let s = solve_lambda_vector(&dec).unwrap();
        assert!((s.lambda[0] - 0.25).abs() < 1e-10 && (s.lambda[1] - 0.25).abs() < 1e-10);
        assert!((s.neg2_log_r - 4.0 * 1.125f64.ln()).abs() < 1e-10);
        assert!((s.neg2_log_r - 0.471132).abs() < 1e-6);
        assert_eq!(
            solve_lambda_vector(&[[-1.0, -1.0], [1.0, 1.0]]),
            Err(Error::SingularCovariance)
        );
        assert_eq!(
            solve_lambda_vector(&[[1.0, 0.5], [2.0, -1.0], [0.5, 3.0]]),
            Err(Error::HullViolation)
        );
    }

    #[test]
    fn adjustment_examples() {
        let adj = adjust_pseudo_values(&[-1.0, 2.0], AdjustmentPolicy::HALF_LOG);
        assert_eq!(adj, vec![-1.0, 2.0, -0.5]);
        let adj = adjust_pseudo_values(&[-1.0, 1.0], AdjustmentPolicy::HALF_LOG);
        assert_eq!(adj[2], 0.0);
        assert!((AdjustmentPolicy::HALF_LOG.a_n(20) - 1.4979).abs() < 1e-4);
        assert_eq!(
            adjust_pseudo_values(&[1.0], AdjustmentPolicy::OFF),
            vec![1.0]
        );
        let rows = adjust_pseudo_rows(&[[1.0, 2.0], [3.0, 0.0]], AdjustmentPolicy::HALF_LOG);
        assert_eq!(rows[2], [-2.0, -1.0]);
    }

    #[test]
    fn adjusted_defined_when_unadjusted_violates_hull() {
        let v = [0.5, 1.0, 2.0];
        assert!(neg2_log_r_scalar(&v).is_err());
        let adj = adjust_pseudo_values(&v, AdjustmentPolicy::HALF_LOG);
        assert!(neg2_log_r_scalar(&adj).unwrap().is_finite());
    }

    fn scalar_values() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0..5.0f64, 3..60)
    }

    fn vector_rows() -> impl Strategy<Value = Vec<[f64; 2]>> {
        prop::collection::vec(prop::array::uniform2(-5.0..5.0f64), 6..60)
    }

    proptest! {
        #[test]
        fn scalar_dual_consistency(v in scalar_values(), shift in -1.5..1.5f64) {
            let v: Vec<f64> = v.iter().map(|x| x + shift).collect();
            if let Ok(s) = solve_lambda_scalar(&v) {
                prop_assert!(s.neg2_log_r >= 0.0);
                let p = el_weights_scalar(&v, s.lambda);
                prop_assert!(p.iter().all(|&w| w > 0.0));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                let m: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
                prop_assert!(m.abs() < 1e-8);
            }
        }

        #[test]
        fn scalar_adjusted_dominance(v in scalar_values(), shift in -1.5..1.5f64) {
            let v: Vec<f64> = v.iter().map(|x| x + shift).collect();
            let plain = infinite_on_hull_violation(neg2_log_r_scalar(&v)).unwrap();
            let adj = neg2_log_r_scalar(&adjust_pseudo_values(&v, AdjustmentPolicy::HALF_LOG)).unwrap();
            prop_assert!(adj <= plain + 1e-9);
        }

        #[test]
        fn vector_dual_consistency(rows in vector_rows(), s0 in -1.0..1.0f64, s1 in -1.0..1.0f64) {
            let rows: Vec<[f64; 2]> = rows.iter().map(|r| [r[0] + s0, r[1] + s1]).collect();
            if let Ok(s) = solve_lambda_vector(&rows) {
                prop_assert!(s.neg2_log_r >= 0.0);
                let p = el_weights_vector(&rows, s.lambda);
                prop_assert!(p.iter().all(|&w| w > 0.0));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                for k in 0..2 {
                    let m: f64 = p.iter().zip(&rows).map(|(a, r)| a * r[k]).sum();
                    prop_assert!(m.abs() < 1e-8);
                }
                let adj = neg2_log_r_vector(&adjust_pseudo_rows(&rows, AdjustmentPolicy::HALF_LOG)).unwrap();
                prop_assert!(adj <= s.neg2_log_r + 1e-9);
            }
        }

        #[test]
        fn vector_matches_scalar_on_one_axis(v in scalar_values(), shift in -1.0..1.0f64) {
            // rows (v_i, 0) and (0, v_i): the problem decouples into two copies
            let v: Vec<f64> = v.iter().map(|x| x + shift).collect();
            if let Ok(s) = solve_lambda_scalar(&v) {
                let rows: Vec<[f64; 2]> = v.iter().map(|&a| [a, 0.0]).chain(v.iter().map(|&a| [0.0, a])).collect();
                if let Ok(sv) = solve_lambda_vector(&rows) {
                    prop_assert!((sv.lambda[0] - s.lambda).abs() < 1e-6 * (1.0 + s.lambda.abs()));
                    prop_assert!((sv.neg2_log_r - 2.0 * s.neg2_log_r).abs() < 1e-6 * (1.0 + s.neg2_log_r));
                }
            }
        }
    }
}
