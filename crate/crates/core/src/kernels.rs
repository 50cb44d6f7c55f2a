//! Pairwise kernels of the Gini U-statistics and the paired-observation
//! types they act on.
//!
//! With `a = (x1, y1)` and `b = (x2, y2)`:
//!
//! * `h1(a, b) = (x1 - x2) * sgn(y1 - y2) / 4` (numerator of the Gini correlation)
//! * `h2(a, b) = |x1 - x2| / 4` (Gini mean difference of `x`, divided by 4)
//! * `h(a, b; g) = g * h2(a, b) - h1(a, b)` (estimating kernel for the correlation)
//!
//! Ties in `y` give `h1 = 0`. The estimators stay defined on tied data, but
//! the continuity assumption behind the limit theory no longer holds, so
//! [`BivariateSample::tie_counts`] is available to detect it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One paired observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateObs {
    pub x: f64,
    pub y: f64,
}

impl BivariateObs {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// The same observation with the coordinate roles exchanged.
    pub const fn swap(self) -> Self {
        Self {
            x: self.y,
            y: self.x,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for BivariateObs {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Number of tied pairs in each coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TieCounts {
    pub x_pairs: usize,
    pub y_pairs: usize,
}

impl TieCounts {
    pub fn any(&self) -> bool {
        self.x_pairs > 0 || self.y_pairs > 0
    }
}

/// An ordered collection of finite paired observations, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl BivariateSample {
    pub fn new<I, O>(obs: I) -> Result<Self>
    where
        I: IntoIterator<Item = O>,
        O: Into<BivariateObs>,
    {
        let (x, y): (Vec<f64>, Vec<f64>) = obs
            .into_iter()
            .map(|o| {
                let o = o.into();
                (o.x, o.y)
            })
            .unzip();
        Self::from_columns(x, y)
    }

    pub fn from_columns(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Unsupported(format!(
                "column lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if let Some(index) = x
            .iter()
            .zip(&y)
            .position(|(a, b)| !(a.is_finite() && b.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn get(&self, i: usize) -> BivariateObs {
        BivariateObs::new(self.x[i], self.y[i])
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = BivariateObs> + '_ {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(&x, &y)| BivariateObs::new(x, y))
    }

    /// The sample with `x` and `y` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// The sample with observation `i` deleted.
    pub fn without(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        let mut x = self.x.clone();
        let mut y = self.y.clone();
        x.remove(i);
        y.remove(i);
        Ok(Self { x, y })
    }

    pub(crate) fn require(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            Err(Error::SampleTooSmall {
                needed,
                got: self.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn tie_counts(&self) -> TieCounts {
        TieCounts {
            x_pairs: tied_pairs(&self.x),
            y_pairs: tied_pairs(&self.y),
        }
    }

    pub fn has_ties(&self) -> bool {
        self.tie_counts().any()
    }
}

fn tied_pairs(values: &[f64]) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut pairs = 0;
    let mut run = 1usize;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            pairs += run * (run - 1) / 2;
            run = 1;
        }
    }
    pairs + run * (run - 1) / 2
}

/// Sign of `a - b` as -1, 0 or 1 (zero on ties).
#[inline]
pub(crate) fn sgn_diff(a: f64, b: f64) -> f64 {
    f64::from(i8::from(a > b) - i8::from(a < b))
}

#[inline]
pub fn kernel_h1(a: BivariateObs, b: BivariateObs) -> f64 {
    0.25 * (a.x - b.x) * sgn_diff(a.y, b.y)
}

#[inline]
pub fn kernel_h2(a: BivariateObs, b: BivariateObs) -> f64 {
    0.25 * (a.x - b.x).abs()
}

/// Estimating kernel `gamma * h2 - h1`; its expectation vanishes at the
/// population Gini correlation.
#[inline]
pub fn kernel_h(a: BivariateObs, b: BivariateObs, gamma: f64) -> f64 {
    kernel_h2(a, b) * gamma - kernel_h1(a, b)
}

/// Vector kernel for the equality problem: `h` at `delta + gamma2` on the
/// `(x, y)` orientation and `h` at `gamma2` on the swapped `(y, x)` pair.
pub fn kernel_equality(a: BivariateObs, b: BivariateObs, delta: f64, gamma2: f64) -> [f64; 2] {
    [
        kernel_h(a, b, delta + gamma2),
        kernel_h(a.swap(), b.swap(), gamma2),
    ]
}

/// Two-sample (2,2)-kernel. `a1, a2` come from the first sample and `b1, b2`
/// from the second; the second coordinate repeats the first with the
/// coordinate-swapped kernels.
pub fn kernel_two_sample(
    a1: BivariateObs,
    a2: BivariateObs,
    b1: BivariateObs,
    b2: BivariateObs,
    delta1: f64,
    delta2: f64,
) -> [f64; 2] {
    let part = |p: BivariateObs, q: BivariateObs, r: BivariateObs, s: BivariateObs, d: f64| {
        let (h1a, h2a) = (kernel_h1(p, q), kernel_h2(p, q));
        let (h1b, h2b) = (kernel_h1(r, s), kernel_h2(r, s));
        h2a * h2b * d - h1a * h2b + h2a * h1b
    };
    [
        part(a1, a2, b1, b2, delta1),
        part(a1.swap(), a2.swap(), b1.swap(), b2.swap(), delta2),
    ]
}
