//! The two-sample and K-sample tests.
//!
//! Both run the same pipeline. Compute `L(φ̂)` once, then for each bootstrap
//! iteration `b` draw a resample from stream `(seed, BOOTSTRAP, b)`, build the
//! perturbed field with `c = τ·√Tₙ` and record
//! `[L(φ̂ + c(φ̂* − φ̂)) − L(φ̂)] / τ²`. Several `τ` values may share the same
//! resamples; each gets its own [`TestResult`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::{
    auto_nu, make_grid, Component, Criterion, MinimizeSettings, Minimum, NuMeasure, Replicate,
};
use crate::rng::{RandomStream, BOOTSTRAP};
use crate::samples::{MultiSampleSet, PairedSample, UnivariateSample};
use crate::transforms::{audit_monotonicity, ParamBox, Transform};
use crate::{Error, Result};

pub use crate::criterion::{auto_nu_with_padding, AUTO_NU_PADDING};

/// Largest cached difference table, in doubles.
const CACHE_LIMIT: usize = 1 << 24;

/// Points per dimension used by the monotonicity audit.
const AUDIT_RESOLUTION: usize = 5;

/// How the two samples were collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    #[default]
    Independent,
    Matched,
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" => Ok(Pairing::Independent),
            "matched" | "paired" => Ok(Pairing::Matched),
            other => {
                Err(Error::Config(format!("unknown pairing `{other}` (expected independent or matched)")))
            }
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::Independent => "independent",
            Pairing::Matched => "matched",
        })
    }
}

/// Test settings. `nu = None` places a normal `ν` on the base sample with
/// [`auto_nu`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub alpha: f64,
    pub tau: f64,
    pub n_boot: usize,
    pub m_nodes: usize,
    pub seed: u64,
    pub pairing: Pairing,
    pub minimize: MinimizeSettings,
    pub nu: Option<NuMeasure>,
}

impl TestConfig {
    pub fn new(tau: f64) -> Self {
        Self {
            alpha: 0.05,
            tau,
            n_boot: 1000,
            m_nodes: 512,
            seed: 0,
            pairing: Pairing::Independent,
            minimize: MinimizeSettings::default(),
            nu: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        check_tau(self.tau)?;
        if self.n_boot == 0 {
            return Err(Error::Config("n_boot must be at least 1".into()));
        }
        if self.m_nodes == 0 {
            return Err(Error::Config("m_nodes must be at least 1".into()));
        }
        if let Some(nu) = &self.nu {
            nu.validate()?;
        }
        self.minimize.validate()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("tau must be positive and finite, got {tau}")))
    }
}

/// Outcome of one test at one `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    /// `Tₙ·L(φ̂)`.
    pub statistic: f64,
    /// `L(φ̂)`.
    pub criterion: f64,
    /// `θ̂_k` for each comparison.
    pub theta_hat: Vec<Vec<f64>>,
    pub t_n: f64,
    pub tau: f64,
    /// `c = τ·√Tₙ`.
    pub mix: f64,
    pub boot_stats: Vec<f64>,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    /// The measure actually integrated against.
    pub nu: NuMeasure,
    pub diagnostics: Vec<String>,
}

/// Data for [`two_sample_test`].
#[derive(Debug, Clone, Copy)]
pub enum TwoSampleData<'a> {
    Independent { x: &'a UnivariateSample, y: &'a UnivariateSample },
    Matched(&'a PairedSample),
}

impl TwoSampleData<'_> {
    pub fn pairing(&self) -> Pairing {
        match self {
            TwoSampleData::Independent { .. } => Pairing::Independent,
            TwoSampleData::Matched(_) => Pairing::Matched,
        }
    }
}

/// `⌈(1−α)·B⌉`-th smallest bootstrap statistic.
pub fn critical_value(boot_stats: &[f64], alpha: f64) -> Result<f64> {
    if boot_stats.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let n = boot_stats.len();
    // The tolerance absorbs rounding in (1 - α)·B, e.g. 0.95 * 1000.
    let rank = (((1.0 - alpha) * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut sorted = boot_stats.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[rank - 1])
}

/// Share of bootstrap statistics at or above `statistic`.
pub fn p_value(boot_stats: &[f64], statistic: f64) -> f64 {
    if boot_stats.is_empty() {
        return f64::NAN;
    }
    let hits = boot_stats.iter().filter(|&&b| b >= statistic).count();
    hits as f64 / boot_stats.len() as f64
}

/// `Tₙ = n_x·∏_k n_k / nᴷ` with `n = n_x + Σ_k n_k`. For one comparison this is
/// `n₁n₂/n`, evaluated by the same expression.
pub fn effective_size(n_base: usize, n_comparisons: &[usize]) -> f64 {
    let n = n_base + n_comparisons.iter().sum::<usize>();
    let num = n_comparisons.iter().fold(n_base as f64, |acc, &k| acc * k as f64);
    num / (n as f64).powi(n_comparisons.len() as i32)
}

/// Tests `F(x) = G(g(x, θ))` for some `θ` in `bx`.
pub fn two_sample_test(
    data: TwoSampleData<'_>,
    family: &dyn Transform,
    bx: &ParamBox,
    config: &TestConfig,
) -> Result<TestResult> {
    let mut out = two_sample_test_taus(data, family, bx, config, &[config.tau])?;
    Ok(out.remove(0))
}

/// [`two_sample_test`] at every `τ` in `taus`, sharing the bootstrap
/// resamples. `config.tau` is ignored.
pub fn two_sample_test_taus(
    data: TwoSampleData<'_>,
    family: &dyn Transform,
    bx: &ParamBox,
    config: &TestConfig,
    taus: &[f64],
) -> Result<Vec<TestResult>> {
    if data.pairing() != config.pairing {
        return Err(Error::Config(format!(
            "configured pairing is {} but the data are {}",
            config.pairing,
            data.pairing()
        )));
    }
    let boxes = std::slice::from_ref(bx);
    match data {
        TwoSampleData::Independent { x, y } => {
            let comps = vec![Component { sample: y, family }];
            run(x, comps, boxes, Scheme::Independent, config, taus)
        }
        TwoSampleData::Matched(pairs) => {
            let comps = vec![Component { sample: pairs.y(), family }];
            run(pairs.x(), comps, boxes, Scheme::Matched(pairs), config, taus)
        }
    }
}

/// Tests `F(x) = G_k(g_k(x, θ_k))` for every `k` at once.
pub fn k_sample_test(
    data: &MultiSampleSet,
    families: &[&dyn Transform],
    boxes: &[ParamBox],
    config: &TestConfig,
) -> Result<TestResult> {
    let mut out = k_sample_test_taus(data, families, boxes, config, &[config.tau])?;
    Ok(out.remove(0))
}

/// [`k_sample_test`] at every `τ` in `taus`, sharing the bootstrap resamples.
pub fn k_sample_test_taus(
    data: &MultiSampleSet,
    families: &[&dyn Transform],
    boxes: &[ParamBox],
    config: &TestConfig,
    taus: &[f64],
) -> Result<Vec<TestResult>> {
    if config.pairing == Pairing::Matched {
        return Err(Error::Unsupported("the K-sample test requires independent samples".into()));
    }
    if families.len() != data.k() {
        return Err(Error::Config(format!(
            "{} families given for {} comparison samples",
            families.len(),
            data.k()
        )));
    }
    let comps = data
        .comparisons()
        .iter()
        .zip(families)
        .map(|(sample, &family)| Component { sample, family })
        .collect();
    run(data.base(), comps, boxes, Scheme::Independent, config, taus)
}

#[derive(Clone, Copy)]
enum Scheme<'a> {
    Independent,
    Matched(&'a PairedSample),
}

fn run(
    base: &UnivariateSample,
    comps: Vec<Component<'_>>,
    boxes: &[ParamBox],
    scheme: Scheme<'_>,
    config: &TestConfig,
    taus: &[f64],
) -> Result<Vec<TestResult>> {
    config.validate()?;
    if taus.is_empty() {
        return Err(Error::Config("at least one tau is required".into()));
    }
    for &tau in taus {
        check_tau(tau)?;
    }
    let nu = match &config.nu {
        Some(nu) => nu.clone(),
        None => auto_nu(base)?,
    };
    let grid = make_grid(&nu, config.m_nodes)?;

    let mut crit = Criterion::new(base, comps.clone(), boxes, &grid, &config.minimize)?;
    let table_size: usize = (0..crit.k()).map(|k| crit.lattice(k).len()).sum::<usize>() * grid.len();
    if table_size <= CACHE_LIMIT {
        crit = crit.with_cached_differences();
    }
    let fit = crit.minimize_base();

    let sizes: Vec<usize> = comps.iter().map(|c| c.sample.len()).collect();
    let t_n = effective_size(base.len(), &sizes);
    let root_t = t_n.sqrt();
    let mixes: Vec<f64> = taus.iter().map(|tau| tau * root_t).collect();

    let draws: Vec<Vec<f64>> = (0..config.n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = RandomStream::new(config.seed, BOOTSTRAP, b as u64);
            let mins = match scheme {
                Scheme::Independent => {
                    let base_star = base.resample(&mut rng);
                    let comp_star: Vec<UnivariateSample> =
                        comps.iter().map(|c| c.sample.resample(&mut rng)).collect();
                    let rep = Replicate { base: &base_star, comparisons: comp_star.iter().collect() };
                    crit.minimize_replicate(&rep, &mixes)?
                }
                Scheme::Matched(pairs) => {
                    let star = pairs.resample(&mut rng);
                    let rep = Replicate { base: star.x(), comparisons: vec![star.y()] };
                    crit.minimize_replicate(&rep, &mixes)?
                }
            };
            Ok(bootstrap_values(&fit, &mins, taus))
        })
        .collect::<Result<_>>()?;

    let statistic = t_n * fit.value;
    let mut shared = audit(&comps, boxes, &grid, &fit);
    shared.sort();
    shared.dedup();

    taus.iter()
        .zip(&mixes)
        .enumerate()
        .map(|(i, (&tau, &mix))| {
            let boot_stats: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            let critical_value = critical_value(&boot_stats, config.alpha)?;
            let mut diagnostics = Vec::new();
            if mix < 1.0 {
                diagnostics.push(format!(
                    "tau*sqrt(T_n) = {mix:.4} is below 1: the bootstrap perturbation is smaller \
                     than the sampling noise; a larger tau is advisable"
                ));
            }
            diagnostics.extend(shared.iter().cloned());
            Ok(TestResult {
                statistic,
                criterion: fit.value,
                theta_hat: fit.theta.clone(),
                t_n,
                tau,
                mix,
                p_value: p_value(&boot_stats, statistic),
                reject: statistic > critical_value,
                critical_value,
                boot_stats,
                nu: nu.clone(),
                diagnostics,
            })
        })
        .collect()
}

/// `[L(φ̂ + c(φ̂* − φ̂)) − L(φ̂)] / τ²` for each `τ`.
pub(crate) fn bootstrap_values(fit: &Minimum, perturbed: &[Minimum], taus: &[f64]) -> Vec<f64> {
    perturbed.iter().zip(taus).map(|(m, tau)| (m.value - fit.value) / (tau * tau)).collect()
}

fn audit(
    comps: &[Component<'_>],
    boxes: &[ParamBox],
    grid: &crate::criterion::QuadratureGrid,
    fit: &Minimum,
) -> Vec<String> {
    let mut out = Vec::new();
    for (k, (comp, b)) in comps.iter().zip(boxes).enumerate() {
        out.extend(audit_monotonicity(comp.family, b, grid.nodes(), AUDIT_RESOLUTION));
        for (j, &t) in fit.theta[k].iter().enumerate() {
            let (lo, hi) = (b.lower()[j], b.upper()[j]);
            if lo < hi && (t == lo || t == hi) {
                out.push(format!(
                    "theta_hat[{k}][{j}] = {t} lies on the box boundary; the box may be too small"
                ));
            }
        }
    }
    out
}
