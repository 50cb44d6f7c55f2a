//! One- and two-sample U-statistics for the Gini correlation.
//!
//! Every fast path here has a quadratic reference implementation kept next
//! to it (`*_naive`) which the tests use as an oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_h1, kernel_h2, kernel_two_sample, BivariateObs, BivariateSample};

/// `U2` values below this are treated as zero (all `x` equal).
pub const DEGENERATE_U2: f64 = 1e-300;

/// Which variable plays the role of `x` in `h1`/`h2`.
///
/// `Xy` estimates `gamma(X, Y) = cov(X, G(Y)) / cov(X, F(X))`; `Yx` swaps the
/// coordinates and estimates `gamma(Y, X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Xy,
    Yx,
}

/// Numerator and denominator U-statistics of the Gini correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniComponents {
    pub u1: f64,
    pub u2: f64,
    pub n: usize,
}

impl GiniComponents {
    pub fn is_degenerate(&self) -> bool {
        self.u2 < DEGENERATE_U2
    }

    /// `u1 / u2`, clamped to `[-1, 1]` against rounding.
    pub fn gamma(&self) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSample(
                "all values of the first variable are equal",
            ));
        }
        Ok((self.u1 / self.u2).clamp(-1.0, 1.0))
    }

    /// The estimating functional `gamma * u2 - u1`.
    pub fn functional(&self, gamma: f64) -> f64 {
        gamma * self.u2 - self.u1
    }
}

/// Per-observation kernel sums `s_i = sum_{j != i} h(Z_i, Z_j)` for `h1` and `h2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSums {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

/// Components and row sums of one orientation, the input to every
/// leave-one-out computation.
#[derive(Debug, Clone, PartialEq)]
pub struct GiniDecomposition {
    pub components: GiniComponents,
    pub rows: RowSums,
}

impl GiniDecomposition {
    pub fn new(sample: &BivariateSample, orientation: Orientation) -> Result<Self> {
        let rows = row_sums(sample, orientation)?;
        let n = sample.len();
        let pairs2 = (n * (n - 1)) as f64;
        let components = GiniComponents {
            u1: rows.s1.iter().sum::<f64>() / pairs2,
            u2: rows.s2.iter().sum::<f64>() / pairs2,
            n,
        };
        Ok(Self { components, rows })
    }

    pub fn leave_one_out(&self, i: usize) -> Result<GiniComponents> {
        leave_one_out_components(&self.components, &self.rows, i)
    }

    /// Jackknife pseudo-values `n U - (n - 1) U_(-i)` of `u1` and `u2`.
    ///
    /// Uses the closed form `(2 s_i - n U) / (n - 2)`.
    pub fn pseudo_components(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.components.n;
        if n < 3 {
            return Err(Error::SampleTooSmall { needed: 3, got: n });
        }
        let nf = n as f64;
        let denom = nf - 2.0;
        let p = |s: &[f64], u: f64| -> Vec<f64> {
            s.iter().map(|&si| (2.0 * si - nf * u) / denom).collect()
        };
        Ok((
            p(&self.rows.s1, self.components.u1),
            p(&self.rows.s2, self.components.u2),
        ))
    }
}

/// Both orientations of one sample, as needed by the two-sample functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedComponents {
    pub xy: GiniComponents,
    pub yx: GiniComponents,
}

fn binom2(n: usize) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

fn oriented(sample: &BivariateSample, orientation: Orientation) -> (&[f64], &[f64]) {
    match orientation {
        Orientation::Xy => (sample.x(), sample.y()),
        Orientation::Yx => (sample.y(), sample.x()),
    }
}

/// Exact pairwise average `C(n,2)^-1 sum_{i<j} kernel(Z_i, Z_j)`.
pub fn u_naive<K>(sample: &BivariateSample, kernel: K) -> Result<f64>
where
    K: Fn(BivariateObs, BivariateObs) -> f64,
{
    sample.require(2)?;
    let n = sample.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = sample.get(i);
        for j in (i + 1)..n {
            total += kernel(a, sample.get(j));
        }
    }
    Ok(total / binom2(n))
}

pub fn gini_components_naive(
    sample: &BivariateSample,
    orientation: Orientation,
) -> Result<GiniComponents> {
    let s = match orientation {
        Orientation::Xy => sample.clone(),
        Orientation::Yx => sample.swapped(),
    };
    Ok(GiniComponents {
        u1: u_naive(&s, kernel_h1)?,
        u2: u_naive(&s, kernel_h2)?,
        n: s.len(),
    })
}

fn sorted_order(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    idx
}

/// `C(n,2)^-1 / 4 * sum_i (2i - 1 - n) v_(i)` where `v` is ordered by `order`.
fn order_statistic_sum(values: &[f64], order: &[usize]) -> f64 {
    let n = values.len();
    let total: f64 = order
        .iter()
        .enumerate()
        .map(|(i, &k)| (2.0 * i as f64 + 1.0 - n as f64) * values[k])
        .sum();
    total / (4.0 * binom2(n))
}

/// Components in `O(n log n)` through linear combinations of order statistics.
///
/// The order-statistic form of `u1` assumes no ties in the ranking variable;
/// with ties it is computed from the row sums instead.
pub fn gini_components_fast(
    sample: &BivariateSample,
    orientation: Orientation,
) -> Result<GiniComponents> {
    sample.require(2)?;
    let (v, k) = oriented(sample, orientation);
    let by_v = sorted_order(v);
    let u2 = order_statistic_sum(v, &by_v);

    let by_k = sorted_order(k);
    let tied = by_k.windows(2).any(|w| k[w[0]] == k[w[1]]);
    let u1 = if tied {
        let s1 = signed_row_sums(v, k);
        s1.iter().sum::<f64>() / (2.0 * binom2(v.len()))
    } else {
        order_statistic_sum(v, &by_k)
    };
    Ok(GiniComponents { u1, u2, n: v.len() })
}

/// Sample Gini correlation `u1 / u2` in the given orientation.
pub fn gini_gamma(sample: &BivariateSample, orientation: Orientation) -> Result<f64> {
    gini_components_fast(sample, orientation)?.gamma()
}

/// Sample Pearson correlation.
pub fn pearson_r(sample: &BivariateSample) -> Result<f64> {
    sample.require(2)?;
    let n = sample.len() as f64;
    let mx = sample.x().iter().sum::<f64>() / n;
    let my = sample.y().iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for o in sample.iter() {
        let (dx, dy) = (o.x - mx, o.y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateSample("zero variance in a coordinate"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `s_i = 1/4 sum_j (v_i - v_j) sgn(k_i - k_j)` for every `i`, in `O(n log n)`.
///
/// Walks the observations in increasing `k`, keeping running counts and sums
/// of `v` below the current key; ties in `k` form one block and contribute
/// nothing to each other. `v` is centred first, which leaves `s_i` unchanged
/// but keeps the running sums small.
fn signed_row_sums(values: &[f64], keys: &[f64]) -> Vec<f64> {
    let n = values.len();
    let centre = values.iter().sum::<f64>() / n as f64;
    let v: Vec<f64> = values.iter().map(|&a| a - centre).collect();
    let total: f64 = v.iter().sum();
    let order = sorted_order(keys);

    let mut out = vec![0.0; n];
    let mut below_count = 0usize;
    let mut below_sum = 0.0;
    let mut start = 0;
    while start < n {
        let key = keys[order[start]];
        let mut end = start + 1;
        while end < n && keys[order[end]] == key {
            end += 1;
        }
        let block = &order[start..end];
        let block_sum: f64 = block.iter().map(|&i| v[i]).sum();
        let above_count = n - below_count - block.len();
        let above_sum = total - below_sum - block_sum;
        let count_diff = below_count as f64 - above_count as f64;
        for &i in block {
            out[i] = 0.25 * (v[i] * count_diff - (below_sum - above_sum));
        }
        below_count += block.len();
        below_sum += block_sum;
        start = end;
    }
    out
}

/// Row sums of `h1` and `h2` via sorting and prefix sums.
pub fn row_sums(sample: &BivariateSample, orientation: Orientation) -> Result<RowSums> {
    sample.require(2)?;
    let (v, k) = oriented(sample, orientation);
    Ok(RowSums {
        s1: signed_row_sums(v, k),
        // |v_i - v_j| = (v_i - v_j) sgn(v_i - v_j)
        s2: signed_row_sums(v, v),
    })
}

/// Quadratic reference for [`row_sums`].
pub fn row_sums_naive(sample: &BivariateSample, orientation: Orientation) -> Result<RowSums> {
    sample.require(2)?;
    let s = match orientation {
        Orientation::Xy => sample.clone(),
        Orientation::Yx => sample.swapped(),
    };
    let n = s.len();
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s1[i] += kernel_h1(s.get(i), s.get(j));
                s2[i] += kernel_h2(s.get(i), s.get(j));
            }
        }
    }
    Ok(RowSums { s1, s2 })
}

/// Components of the sample with observation `i` removed:
/// `U_(-i) = (C(n,2) U - s_i) / C(n-1,2)`.
pub fn leave_one_out_components(
    components: &GiniComponents,
    rows: &RowSums,
    i: usize,
) -> Result<GiniComponents> {
    let n = components.n;
    if n < 3 {
        return Err(Error::SampleTooSmall { needed: 3, got: n });
    }
    if i >= n || i >= rows.s1.len() {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let full = binom2(n);
    let reduced = binom2(n - 1);
    Ok(GiniComponents {
        u1: (full * components.u1 - rows.s1[i]) / reduced,
        u2: (full * components.u2 - rows.s2[i]) / reduced,
        n: n - 1,
    })
}

/// The factorised two-sample functional: with `a` the first and `b` the
/// second sample, coordinate one is `a.u2 b.u2 d1 - a.u1 b.u2 + a.u2 b.u1`
/// on the `xy` components and coordinate two the same on `yx`.
pub fn two_sample_functional(
    first: &OrientedComponents,
    second: &OrientedComponents,
    delta: [f64; 2],
) -> [f64; 2] {
    let part = |a: &GiniComponents, b: &GiniComponents, d: f64| {
        a.u2 * b.u2 * d - a.u1 * b.u2 + a.u2 * b.u1
    };
    [
        part(&first.xy, &second.xy, delta[0]),
        part(&first.yx, &second.yx, delta[1]),
    ]
}

/// Quadruple-sum reference for [`two_sample_functional`].
pub fn two_sample_functional_naive(
    first: &BivariateSample,
    second: &BivariateSample,
    delta: [f64; 2],
) -> Result<[f64; 2]> {
    first.require(2)?;
    second.require(2)?;
    let (n1, n2) = (first.len(), second.len());
    let mut acc = [0.0; 2];
    for i1 in 0..n1 {
        for i2 in (i1 + 1)..n1 {
            for j1 in 0..n2 {
                for j2 in (j1 + 1)..n2 {
                    let h = kernel_two_sample(
                        first.get(i1),
                        first.get(i2),
                        second.get(j1),
                        second.get(j2),
                        delta[0],
                        delta[1],
                    );
                    acc[0] += h[0];
                    acc[1] += h[1];
                }
            }
        }
    }
    let norm = binom2(n1) * binom2(n2);
    Ok([acc[0] / norm, acc[1] / norm])
}

impl OrientedComponents {
    pub fn new(sample: &BivariateSample) -> Result<Self> {
        Ok(Self {
            xy: gini_components_fast(sample, Orientation::Xy)?,
            yx: gini_components_fast(sample, Orientation::Yx)?,
        })
    }
}
