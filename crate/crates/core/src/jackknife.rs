//! Jackknife pseudo-values for the three likelihood settings and the
//! jackknife variance estimator.
//!
//! Pseudo-values are `V_i = n T_n - (n - 1) T_(-i)`. All constructors go
//! through the row-sum identities in [`crate::ustat`], so the full set costs
//! `O(n log n)`. Because the estimating functionals are affine in their
//! parameter, so are the pseudo-values; [`AffinePseudo`] keeps the slope and
//! offset so that a confidence-interval search can re-evaluate them in `O(n)`.

use crate::error::{Error, Result};
use crate::kernels::BivariateSample;
use crate::ustat::{
    two_sample_functional, GiniComponents, GiniDecomposition, Orientation, OrientedComponents,
};

/// Scalar pseudo-values at a parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPseudo {
    pub values: Vec<f64>,
    pub param: f64,
}

impl ScalarPseudo {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Two-dimensional pseudo-values over the pooled sample; the first `sizes.0`
/// rows belong to the first sample.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPseudo {
    pub rows: Vec<[f64; 2]>,
    pub param: [f64; 2],
    pub sizes: (usize, usize),
}

impl VectorPseudo {
    pub fn mean(&self) -> [f64; 2] {
        let n = self.rows.len() as f64;
        let s = self
            .rows
            .iter()
            .fold([0.0, 0.0], |a, r| [a[0] + r[0], a[1] + r[1]]);
        [s[0] / n, s[1] / n]
    }
}

/// Pseudo-values of the form `V_i(theta) = theta * slope_i + offset_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePseudo {
    slope: Vec<f64>,
    offset: Vec<f64>,
}

impl AffinePseudo {
    pub fn len(&self) -> usize {
        self.slope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slope.is_empty()
    }

    /// Zero of the mean pseudo-value, `None` when the mean slope vanishes.
    pub fn root(&self) -> Option<f64> {
        let a: f64 = self.slope.iter().sum();
        let b: f64 = self.offset.iter().sum();
        (a != 0.0).then(|| -b / a)
    }

    pub fn slope(&self) -> &[f64] {
        &self.slope
    }

    pub fn evaluate_into(&self, theta: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.slope
                .iter()
                .zip(&self.offset)
                .map(|(&a, &b)| theta * a + b),
        );
    }

    pub fn at(&self, theta: f64) -> ScalarPseudo {
        let mut values = Vec::with_capacity(self.len());
        self.evaluate_into(theta, &mut values);
        ScalarPseudo {
            values,
            param: theta,
        }
    }
}

fn nondegenerate(d: &GiniDecomposition, what: &'static str) -> Result<()> {
    if d.components.is_degenerate() {
        Err(Error::DegenerateSample(what))
    } else {
        Ok(())
    }
}

const X_CONSTANT: &str = "all x values are equal";
const Y_CONSTANT: &str = "all y values are equal";

/// Affine pseudo-values for a single Gini correlation: slope are the `u2`
/// pseudo-values and offset the negated `u1` pseudo-values.
pub fn gamma_profile(sample: &BivariateSample, orientation: Orientation) -> Result<AffinePseudo> {
    sample.require(3)?;
    let d = GiniDecomposition::new(sample, orientation)?;
    nondegenerate(
        &d,
        match orientation {
            Orientation::Xy => X_CONSTANT,
            Orientation::Yx => Y_CONSTANT,
        },
    )?;
    let (p1, p2) = d.pseudo_components()?;
    Ok(AffinePseudo {
        slope: p2,
        offset: p1.into_iter().map(|v| -v).collect(),
    })
}

/// Affine pseudo-values for `Delta = gamma(X,Y) - gamma(Y,X)`.
///
/// `M(Delta) = (Delta + gamma2) u2 - u1` on the `(X, Y)` components, where
/// each leave-one-out term uses the `gamma(Y,X)` of its own sub-sample.
/// The slope matches [`gamma_profile`]. Returns the profile and the
/// full-sample `gamma(Y,X)`.
pub fn delta_profile(sample: &BivariateSample) -> Result<(AffinePseudo, f64)> {
    sample.require(3)?;
    let xy = GiniDecomposition::new(sample, Orientation::Xy)?;
    let yx = GiniDecomposition::new(sample, Orientation::Yx)?;
    nondegenerate(&xy, X_CONSTANT)?;
    nondegenerate(&yx, Y_CONSTANT)?;
    let gamma2 = yx.components.gamma()?;
    let (_, slope) = xy.pseudo_components()?;
    let n = sample.len() as f64;
    let full = xy.components.functional(gamma2);
    let offset = (0..sample.len())
        .map(|i| {
            let a = xy.leave_one_out(i)?;
            let b = yx.leave_one_out(i)?;
            if b.is_degenerate() {
                return Err(Error::DegenerateSample(Y_CONSTANT));
            }
            Ok(n * full - (n - 1.0) * a.functional(b.u1 / b.u2))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((AffinePseudo { slope, offset }, gamma2))
}

pub fn pseudo_values_gamma(
    sample: &BivariateSample,
    gamma: f64,
    orientation: Orientation,
) -> Result<ScalarPseudo> {
    Ok(gamma_profile(sample, orientation)?.at(gamma))
}

pub fn pseudo_values_delta(sample: &BivariateSample, delta: f64) -> Result<ScalarPseudo> {
    Ok(delta_profile(sample)?.0.at(delta))
}

#[derive(Debug, Clone)]
struct OrientedDecomposition {
    full: OrientedComponents,
    loo: Vec<OrientedComponents>,
}

impl OrientedDecomposition {
    fn new(sample: &BivariateSample) -> Result<Self> {
        sample.require(3)?;
        let xy = GiniDecomposition::new(sample, Orientation::Xy)?;
        let yx = GiniDecomposition::new(sample, Orientation::Yx)?;
        nondegenerate(&xy, X_CONSTANT)?;
        nondegenerate(&yx, Y_CONSTANT)?;
        let loo = (0..sample.len())
            .map(|i| {
                Ok(OrientedComponents {
                    xy: xy.leave_one_out(i)?,
                    yx: yx.leave_one_out(i)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            full: OrientedComponents {
                xy: xy.components,
                yx: yx.components,
            },
            loo,
        })
    }
}

/// Precomputed leave-one-out components of two independent samples; the
/// pooled pseudo-values at any `(delta1, delta2)` then cost `O(n1 + n2)`.
#[derive(Debug, Clone)]
pub struct TwoSampleProfile {
    first: OrientedDecomposition,
    second: OrientedDecomposition,
}

impl TwoSampleProfile {
    pub fn new(first: &BivariateSample, second: &BivariateSample) -> Result<Self> {
        Ok(Self {
            first: OrientedDecomposition::new(first)?,
            second: OrientedDecomposition::new(second)?,
        })
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.first.loo.len(), self.second.loo.len())
    }

    /// `(gamma_xy, gamma_yx)` of the first sample minus those of the second.
    pub fn estimate(&self) -> Result<[f64; 2]> {
        let g = |c: &GiniComponents| c.gamma();
        Ok([
            g(&self.first.full.xy)? - g(&self.second.full.xy)?,
            g(&self.first.full.yx)? - g(&self.second.full.yx)?,
        ])
    }

    pub fn functional(&self, delta: [f64; 2]) -> [f64; 2] {
        two_sample_functional(&self.first.full, &self.second.full, delta)
    }

    /// Block pseudo-values `V_(i,0)` (first sample) and `V_(0,j)` (second).
    pub fn block_pseudo(&self, delta: [f64; 2]) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
        let u = self.functional(delta);
        let (n1, n2) = self.sizes();
        let block = |n: usize, reduced: [f64; 2]| {
            let nf = n as f64;
            [
                nf * u[0] - (nf - 1.0) * reduced[0],
                nf * u[1] - (nf - 1.0) * reduced[1],
            ]
        };
        let first = self
            .first
            .loo
            .iter()
            .map(|c| block(n1, two_sample_functional(c, &self.second.full, delta)))
            .collect();
        let second = self
            .second
            .loo
            .iter()
            .map(|c| block(n2, two_sample_functional(&self.first.full, c, delta)))
            .collect();
        (first, second)
    }

    /// Pooled-sample pseudo-values `n U - (n - 1) U_(-i)`, written through the
    /// block pseudo-values with weights `(n - 1)/(n_k - 1)` and
    /// `n_other/(n_k - 1)`.
    pub fn at(&self, delta: [f64; 2]) -> VectorPseudo {
        let u = self.functional(delta);
        let (n1, n2) = self.sizes();
        let n = (n1 + n2) as f64;
        let (b1, b2) = self.block_pseudo(delta);
        let reweight = |rows: Vec<[f64; 2]>, own: usize, other: usize| {
            let a = (n - 1.0) / (own as f64 - 1.0);
            let b = other as f64 / (own as f64 - 1.0);
            rows.into_iter()
                .map(move |r| [a * r[0] - b * u[0], a * r[1] - b * u[1]])
        };
        let rows = reweight(b1, n1, n2).chain(reweight(b2, n2, n1)).collect();
        VectorPseudo {
            rows,
            param: delta,
            sizes: (n1, n2),
        }
    }
}

pub fn pseudo_values_two_sample(
    first: &BivariateSample,
    second: &BivariateSample,
    delta: [f64; 2],
) -> Result<VectorPseudo> {
    Ok(TwoSampleProfile::new(first, second)?.at(delta))
}

/// `(n - 1)/n * sum (t_i - mean)^2` over leave-one-out estimates `t_i`.
pub fn jackknife_variance_from(loo: &[f64]) -> f64 {
    let n = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / n;
    (n - 1.0) / n * loo.iter().map(|t| (t - mean).powi(2)).sum::<f64>()
}

/// Jackknife variance of an arbitrary estimator, recomputing it on each of
/// the `n` leave-one-out sub-samples.
pub fn jackknife_variance<F>(estimator: F, sample: &BivariateSample) -> Result<f64>
where
    F: Fn(&BivariateSample) -> Result<f64>,
{
    sample.require(3)?;
    let loo = (0..sample.len())
        .map(|i| estimator(&sample.without(i)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(jackknife_variance_from(&loo))
}

/// Leave-one-out Gini correlations in `O(n log n)`.
pub fn leave_one_out_gamma(sample: &BivariateSample, orientation: Orientation) -> Result<Vec<f64>> {
    sample.require(3)?;
    let d = GiniDecomposition::new(sample, orientation)?;
    (0..sample.len())
        .map(|i| d.leave_one_out(i)?.gamma())
        .collect()
}

/// Leave-one-out values of `gamma(X,Y) - gamma(Y,X)`.
pub fn leave_one_out_delta(sample: &BivariateSample) -> Result<Vec<f64>> {
    let a = leave_one_out_gamma(sample, Orientation::Xy)?;
    let b = leave_one_out_gamma(sample, Orientation::Yx)?;
    Ok(a.into_iter().zip(b).map(|(p, q)| p - q).collect())
}
