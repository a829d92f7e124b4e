use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::criterion::{normal_cdf, normal_quantile, NuMeasure};
use crate::hypothesis::{Pairing, TwoSampleData};
use crate::rng::RandomStream;
use crate::samples::{PairedSample, UnivariateSample};
use crate::transforms::ParamBox;
use crate::{Error, Result};

/// Correlation of `(X, Z, U)` (continuous) or `(X, U, V)` (discrete) for
/// matched pairs.
pub const SIGMA3: [[f64; 3]; 3] = [[1.0, 0.5, 0.5], [0.5, 1.0, 0.0], [0.5, 0.0, 1.0]];

/// Largest uniform draw fed to a quantile function, `1 − 2⁻⁵³`.
const U_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DgpFamily {
    Continuous,
    Discrete,
}

impl FromStr for DgpFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" => Ok(DgpFamily::Continuous),
            "discrete" => Ok(DgpFamily::Discrete),
            other => {
                Err(Error::Config(format!("unknown DGP family `{other}` (expected continuous or discrete)")))
            }
        }
    }
}

impl fmt::Display for DgpFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DgpFamily::Continuous => "continuous",
            DgpFamily::Discrete => "discrete",
        })
    }
}

impl DgpFamily {
    /// Weights `(a, b)` in `Y = a·first + b·second`, where the pair is `(Z, U)`
    /// for continuous designs and `(U, V)` for discrete ones.
    fn weights(self, dgp_id: u8) -> (f64, f64) {
        match (self, dgp_id) {
            (DgpFamily::Continuous, 0) => (1.0, 0.0),
            (DgpFamily::Continuous, 1) => (0.5, 0.5),
            (DgpFamily::Continuous, 2) => (0.25, 0.75),
            (DgpFamily::Continuous, _) => (0.0, 1.0),
            (DgpFamily::Discrete, 0) => (1.0, 0.0),
            (DgpFamily::Discrete, 1) => (0.9, 0.1),
            (DgpFamily::Discrete, 2) => (0.75, 0.25),
            (DgpFamily::Discrete, _) => (0.5, 0.5),
        }
    }

    /// The integrating measure used by the simulation designs.
    pub fn default_nu(self) -> NuMeasure {
        match self {
            DgpFamily::Continuous => NuMeasure::Normal { mean: 0.0, sd: 5.0 / 3.0 },
            DgpFamily::Discrete => NuMeasure::Normal { mean: 5.0, sd: 5.0 },
        }
    }
}

/// Location-scale box `[−0.2, 0.2] × [2^−0.2, 2^0.2]`.
pub fn default_box() -> ParamBox {
    ParamBox::new(vec![-0.2, 2f64.powf(-0.2)], vec![0.2, 2f64.powf(0.2)]).expect("constant box is valid")
}

/// One data generating process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DgpSpec {
    pub family: DgpFamily,
    /// `0` is the null; `1..=3` move progressively further from it.
    pub dgp_id: u8,
    pub pairing: Pairing,
    pub n1: usize,
    pub n2: usize,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dgp_id > 3 {
            return Err(Error::Config(format!("dgp_id must be 0..=3, got {}", self.dgp_id)));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.pairing == Pairing::Matched && self.n1 != self.n2 {
            return Err(Error::Config(format!(
                "matched pairs need n1 = n2, got {} and {}",
                self.n1, self.n2
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DgpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({}) {} {}", self.family, self.pairing, self.dgp_id, self.n1, self.n2)
    }
}

/// A generated data set.
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Independent { x: UnivariateSample, y: UnivariateSample },
    Matched(PairedSample),
}

impl Generated {
    pub fn as_data(&self) -> TwoSampleData<'_> {
        match self {
            Generated::Independent { x, y } => TwoSampleData::Independent { x, y },
            Generated::Matched(p) => TwoSampleData::Matched(p),
        }
    }

    pub fn x(&self) -> &UnivariateSample {
        match self {
            Generated::Independent { x, .. } => x,
            Generated::Matched(p) => p.x(),
        }
    }

    pub fn y(&self) -> &UnivariateSample {
        match self {
            Generated::Independent { y, .. } => y,
            Generated::Matched(p) => p.y(),
        }
    }
}

/// `Φ⁻¹(u)`.
pub fn standard_normal_quantile(u: f64) -> f64 {
    normal_quantile(u.clamp(f64::MIN_POSITIVE, U_MAX)).expect("clamped into (0, 1)")
}

/// Quantile of `Unif[−3, 3]`.
pub fn uniform3_quantile(u: f64) -> f64 {
    -3.0 + 6.0 * u
}

/// Quantile of `Unif{1, …, 10}`: `⌈10u⌉` clamped to `[1, 10]`.
pub fn discrete10_quantile(u: f64) -> f64 {
    (10.0 * u).ceil().clamp(1.0, 10.0)
}

/// Draws `n` rows from the Gaussian copula with correlation `sigma`, mapping
/// coordinate `j` through `quantiles[j]`.
///
/// Each row draws `d` standard normals `e` by inversion, forms `w = Le` with
/// `LLᵀ = sigma`, and returns `q_j(Φ(w_j))`.
pub fn gaussian_copula_sample(
    sigma: &[Vec<f64>],
    quantiles: &[&dyn Fn(f64) -> f64],
    n: usize,
    rng: &mut RandomStream,
) -> Result<Vec<Vec<f64>>> {
    let d = sigma.len();
    if d == 0 || sigma.iter().any(|row| row.len() != d) {
        return Err(Error::Config("correlation matrix must be square and nonempty".into()));
    }
    if quantiles.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: quantiles.len() });
    }
    #[allow(clippy::needless_range_loop)]
    for i in 0..d {
        if sigma[i][i] != 1.0 {
            return Err(Error::Config(format!("correlation diagonal entry {i} is not 1")));
        }
        for j in 0..i {
            if sigma[i][j] != sigma[j][i] || !sigma[i][j].is_finite() {
                return Err(Error::Config("correlation matrix must be symmetric".into()));
            }
        }
    }
    let m = DMatrix::from_fn(d, d, |i, j| sigma[i][j]);
    let l = m.cholesky().ok_or(Error::NotPositiveDefinite)?.unpack();
    let mut e = vec![0.0; d];
    let rows = (0..n)
        .map(|_| {
            for v in e.iter_mut() {
                *v = standard_normal_quantile(rng.open01());
            }
            (0..d)
                .map(|i| {
                    let w = (0..=i).fold(0.0, |acc, j| acc + l[(i, j)] * e[j]);
                    quantiles[i](normal_cdf(w).clamp(f64::MIN_POSITIVE, U_MAX))
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

/// Draws one data set.
///
/// Independent designs draw `X₁..X_{n1}` first, then for each `i ≤ n2` the
/// pair `(Z_i, U_i)` (continuous) or `(U_i, V_i)` (discrete). Matched designs
/// draw `n1` rows of the Σ₃ copula.
pub fn generate(spec: &DgpSpec, rng: &mut RandomStream) -> Result<Generated> {
    spec.validate()?;
    let (a, b) = spec.family.weights(spec.dgp_id);
    let mix = |first: f64, second: f64| {
        if b == 0.0 {
            first
        } else if a == 0.0 {
            second
        } else {
            a * first + b * second
        }
    };
    type Quantile<'q> = &'q dyn Fn(f64) -> f64;
    let (qx, q1, q2): (Quantile, Quantile, Quantile) = match spec.family {
        DgpFamily::Continuous => (&standard_normal_quantile, &standard_normal_quantile, &uniform3_quantile),
        DgpFamily::Discrete => (&discrete10_quantile, &discrete10_quantile, &discrete10_quantile),
    };
    match spec.pairing {
        Pairing::Independent => {
            let x: Vec<f64> = (0..spec.n1).map(|_| qx(rng.open01())).collect();
            let y: Vec<f64> = (0..spec.n2)
                .map(|_| {
                    let first = q1(rng.open01());
                    let second = q2(rng.open01());
                    mix(first, second)
                })
                .collect();
            Ok(Generated::Independent {
                x: UnivariateSample::from_finite(x),
                y: UnivariateSample::from_finite(y),
            })
        }
        Pairing::Matched => {
            let sigma: Vec<Vec<f64>> = SIGMA3.iter().map(|r| r.to_vec()).collect();
            let rows = gaussian_copula_sample(&sigma, &[qx, q1, q2], spec.n1, rng)?;
            let pairs = rows.iter().map(|r| (r[0], mix(r[1], r[2]))).collect();
            Ok(Generated::Matched(PairedSample::from_finite(pairs)))
        }
    }
}
