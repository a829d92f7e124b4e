//! The integrating measure `ν` and its deterministic node set.

use serde::{Deserialize, Serialize};

use super::normal::normal_quantile;
use crate::samples::UnivariateSample;
use crate::{Error, Result};

/// Default padding of the base-sample range used by [`auto_nu`], as a
/// fraction of the range on each side.
pub const AUTO_NU_PADDING: f64 = 0.005;

/// Probability measure `ν` on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuMeasure {
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Equal-weight point masses at the listed, strictly increasing nodes.
    Explicit {
        nodes: Vec<f64>,
    },
}

impl NuMeasure {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        let nu = NuMeasure::Normal { mean, sd };
        nu.validate()?;
        Ok(nu)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NuMeasure::Normal { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() || *sd <= 0.0 {
                    return Err(Error::Config(format!(
                        "normal nu needs a finite mean and positive sd, got mean={mean} sd={sd}"
                    )));
                }
            }
            NuMeasure::Explicit { nodes } => {
                if nodes.is_empty() {
                    return Err(Error::Config("explicit nu needs at least one node".into()));
                }
                if nodes.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("explicit nu nodes must be finite".into()));
                }
                if nodes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("explicit nu nodes must be strictly increasing".into()));
                }
            }
        }
        Ok(())
    }
}

/// Equal-weight quadrature nodes: `∫ f dν ≈ (1/m) Σ f(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
}

impl QuadratureGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.nodes.len() as f64
    }
}

/// Builds the node set for `nu`.
///
/// A normal `ν` gets its equal-probability quantiles `Q((j - 0.5)/m)`,
/// `j = 1..m`; the upper half mirrors the lower half exactly. Explicit nodes
/// are passed through and `m` is ignored.
pub fn make_grid(nu: &NuMeasure, m: usize) -> Result<QuadratureGrid> {
    nu.validate()?;
    let nodes = match nu {
        NuMeasure::Explicit { nodes } => nodes.clone(),
        NuMeasure::Normal { mean, sd } => {
            if m == 0 {
                return Err(Error::Config("number of quadrature nodes must be at least 1".into()));
            }
            let half = m.div_ceil(2);
            let z: Vec<f64> = (0..half)
                .map(|j| {
                    let p = (j as f64 + 0.5) / m as f64;
                    if p == 0.5 {
                        Ok(0.0)
                    } else {
                        normal_quantile(p)
                    }
                })
                .collect::<Result<_>>()?;
            (0..m)
                .map(|j| {
                    let zj = if j < half { z[j] } else { -z[m - 1 - j] };
                    mean + sd * zj
                })
                .collect()
        }
    };
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "{m} quadrature nodes collapse at this scale; use fewer nodes or a wider nu"
        )));
    }
    Ok(QuadratureGrid { nodes })
}

/// Normal `ν` centred on the padded base-sample range: mean `(M̄ + M̲)/2`,
/// sd `(M̄ - M̲)/6`, with `M̲`/`M̄` the sample min/max moved outward by
/// `padding × range`.
pub fn auto_nu_with_padding(base: &UnivariateSample, padding: f64) -> Result<NuMeasure> {
    let (lo, hi) = (base.min(), base.max());
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(Error::Domain("cannot place nu on a constant sample (zero range)".into()));
    }
    if !(padding >= 0.0) {
        return Err(Error::Config(format!("padding must be nonnegative, got {padding}")));
    }
    let (lo, hi) = (lo - padding * range, hi + padding * range);
    NuMeasure::normal((hi + lo) / 2.0, (hi - lo) / 6.0)
}

/// [`auto_nu_with_padding`] with the default padding.
pub fn auto_nu(base: &UnivariateSample) -> Result<NuMeasure> {
    auto_nu_with_padding(base, AUTO_NU_PADDING)
}
