//! Univariate and paired samples, empirical CDFs and bootstrap resampling.

use crate::rng::RandomStream;
use crate::{Error, Result};

/// A nonempty sample of finite reals with a retained ascending copy.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl UnivariateSample {
    /// Validates and stores `values`. Ties are kept verbatim.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self::from_finite(values))
    }

    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Self { values, sorted }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; samples are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Number of observations `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// Empirical CDF `#{values <= x} / n`, by binary search.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    /// Empirical CDF at every query point, written into `out`.
    ///
    /// Equal, value for value, to calling [`ecdf`](Self::ecdf) on each query.
    /// Runs in `O(m log(n/m))` when the queries are ascending (the common case
    /// of sorted quadrature nodes pushed through an increasing transform) and
    /// falls back to a fresh binary search whenever a query steps backwards.
    pub fn ecdf_many(&self, queries: impl IntoIterator<Item = f64>, out: &mut [f64]) {
        let n = self.sorted.len();
        let inv = n as f64;
        let mut pos = 0usize;
        let mut prev = f64::NEG_INFINITY;
        for (slot, q) in out.iter_mut().zip(queries) {
            if q >= prev {
                pos += gallop_le(&self.sorted[pos..], q);
            } else {
                pos = self.count_le(q);
            }
            prev = q;
            *slot = pos as f64 / inv;
        }
    }

    /// Draws `n` values with replacement.
    ///
    /// Indices address the ascending copy, so the output depends only on the
    /// multiset of values and the stream, never on input order.
    pub fn resample(&self, rng: &mut RandomStream) -> UnivariateSample {
        let n = self.len();
        let draws = (0..n).map(|_| self.sorted[rng.index(n)]).collect();
        Self::from_finite(draws)
    }
}

/// Number of leading entries `<= q` in an ascending slice, searching outward
/// from the front.
fn gallop_le(sorted: &[f64], q: f64) -> usize {
    if sorted.is_empty() || sorted[0] > q {
        return 0;
    }
    let mut hi = 1usize;
    while hi < sorted.len() && sorted[hi] <= q {
        hi *= 2;
    }
    let lo = hi / 2;
    let hi = hi.min(sorted.len());
    lo + sorted[lo..hi].partition_point(|&v| v <= q)
}

/// Matched pairs `(x_i, y_i)`, both coordinates finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pairs: Vec<(f64, f64)>,
    x: UnivariateSample,
    y: UnivariateSample,
}

impl PairedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index: i, value: x });
            }
            if !y.is_finite() {
                return Err(Error::NonFinite { index: i, value: y });
            }
        }
        Ok(Self::from_finite(pairs))
    }

    /// Builds pairs from two coordinate vectors, which must have equal length.
    pub fn from_columns(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::PairLengthMismatch { x: x.len(), y: y.len() });
        }
        Self::new(x.into_iter().zip(y).collect())
    }

    pub(crate) fn from_finite(pairs: Vec<(f64, f64)>) -> Self {
        let x = UnivariateSample::from_finite(pairs.iter().map(|p| p.0).collect());
        let y = UnivariateSample::from_finite(pairs.iter().map(|p| p.1).collect());
        Self { pairs, x, y }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn x(&self) -> &UnivariateSample {
        &self.x
    }

    pub fn y(&self) -> &UnivariateSample {
        &self.y
    }

    /// Draws `n` whole pairs with replacement; coordinates stay coupled.
    ///
    /// Indices address the pairs in lexicographic `(x, y)` order.
    pub fn resample(&self, rng: &mut RandomStream) -> PairedSample {
        let mut ordered = self.pairs.clone();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let n = ordered.len();
        let draws = (0..n).map(|_| ordered[rng.index(n)]).collect();
        Self::from_finite(draws)
    }
}

/// A base sample and `K >= 1` comparison samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSampleSet {
    base: UnivariateSample,
    comparisons: Vec<UnivariateSample>,
}

impl MultiSampleSet {
    pub fn new(base: UnivariateSample, comparisons: Vec<UnivariateSample>) -> Result<Self> {
        if comparisons.is_empty() {
            return Err(Error::Config("at least one comparison sample is required".into()));
        }
        Ok(Self { base, comparisons })
    }

    pub fn base(&self) -> &UnivariateSample {
        &self.base
    }

    pub fn comparisons(&self) -> &[UnivariateSample] {
        &self.comparisons
    }

    pub fn k(&self) -> usize {
        self.comparisons.len()
    }
}

/// `ecdf_eval` in free-function form.
pub fn ecdf_eval(sample: &UnivariateSample, x: f64) -> f64 {
    sample.ecdf(x)
}

/// `resample_iid` in free-function form.
pub fn resample_iid(sample: &UnivariateSample, rng: &mut RandomStream) -> UnivariateSample {
    sample.resample(rng)
}

/// `resample_pairs` in free-function form.
pub fn resample_pairs(paired: &PairedSample, rng: &mut RandomStream) -> PairedSample {
    paired.resample(rng)
}
