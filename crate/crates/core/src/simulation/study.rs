use std::fmt::Write;

use rayon::prelude::*;

use super::dgp::{default_box, generate, DgpSpec, Generated};
use crate::criterion::{make_grid, Component, Criterion, MinimizeSettings, NuMeasure, Replicate};
use crate::hypothesis::{bootstrap_values, critical_value, effective_size};
use crate::rng::{RandomStream, REPLICATION};
use crate::transforms::{builtin_family, FamilyKind, ParamBox};
use crate::{Error, Result};

/// A grid of designs evaluated at a list of `τ` values.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub dgps: Vec<DgpSpec>,
    pub taus: Vec<f64>,
    /// Monte Carlo replications per design.
    pub n_mc: usize,
    pub alpha: f64,
    pub seed: u64,
    pub m_nodes: usize,
    pub minimize: MinimizeSettings,
    /// Overrides the design family's measure.
    pub nu: Option<NuMeasure>,
    /// Overrides the location-scale box `[−0.2, 0.2] × [2^−0.2, 2^0.2]`.
    pub param_box: Option<ParamBox>,
}

impl StudyPlan {
    pub fn new(dgps: Vec<DgpSpec>, taus: Vec<f64>, n_mc: usize) -> Self {
        Self {
            dgps,
            taus,
            n_mc,
            alpha: 0.05,
            seed: 0,
            m_nodes: 512,
            minimize: MinimizeSettings::default(),
            nu: None,
            param_box: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_mc == 0 {
            return Err(Error::Config("n_mc must be at least 1".into()));
        }
        if self.taus.is_empty() {
            return Err(Error::Config("at least one tau is required".into()));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Config(format!("tau must be positive and finite, got {t}")));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.m_nodes == 0 {
            return Err(Error::Config("m_nodes must be at least 1".into()));
        }
        if let Some(nu) = &self.nu {
            nu.validate()?;
        }
        for spec in &self.dgps {
            spec.validate()?;
        }
        self.minimize.validate()
    }
}

/// Rejection rates of one design, one entry per `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub spec: DgpSpec,
    pub rates: Vec<f64>,
    /// Warp-speed critical values `ĉ(τ)`.
    pub critical_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub taus: Vec<f64>,
    pub n_mc: usize,
    pub alpha: f64,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    /// One line per design; `τ` values form the trailing columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,pairing,dgp,n1,n2");
        for t in &self.taus {
            let _ = write!(out, ",{t}");
        }
        out.push('\n');
        for row in &self.rows {
            let s = &row.spec;
            let _ = write!(out, "{},{},{},{},{}", s.family, s.pairing, s.dgp_id, s.n1, s.n2);
            for r in &row.rates {
                let _ = write!(out, ",{r}");
            }
            out.push('\n');
        }
        out
    }

    /// Markdown-style table per (family, pairing) block: rows are
    /// `DGP × n1 × n2`, columns are `τ`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut blocks: Vec<_> = self.rows.iter().map(|r| (r.spec.family, r.spec.pairing)).collect();
        blocks.dedup();
        let mut seen = Vec::new();
        for key in blocks {
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(
                out,
                "{} data, {} samples (alpha = {}, {} replications)\n",
                key.0, key.1, self.alpha, self.n_mc
            );
            let mut header = String::from("| DGP |   n1 |   n2 |");
            let mut rule = String::from("|----:|-----:|-----:|");
            for t in &self.taus {
                let _ = write!(header, " {:>6} |", format!("{t}"));
                rule.push_str("-------:|");
            }
            let _ = writeln!(out, "{header}\n{rule}");
            for row in self.rows.iter().filter(|r| (r.spec.family, r.spec.pairing) == key) {
                let s = &row.spec;
                let _ = write!(out, "| ({}) | {:>4} | {:>4} |", s.dgp_id, s.n1, s.n2);
                for r in &row.rates {
                    let _ = write!(out, " {r:>6.3} |");
                }
                out.push('\n');
            }
        }
        out
    }
}

/// One warp-speed replication: the statistic `S_r` and a single bootstrap
/// statistic `B_r(τ)` for every `τ`, all from stream `(seed, REPLICATION, r)`.
///
/// The stream depends on the replication index only, so every design and
/// every `τ` column shares the same underlying uniforms.
pub fn replicate(plan: &StudyPlan, spec: &DgpSpec, r: u64) -> Result<(f64, Vec<f64>)> {
    let mut rng = RandomStream::new(plan.seed, REPLICATION, r);
    let data = generate(spec, &mut rng)?;
    let nu = plan.nu.clone().unwrap_or_else(|| spec.family.default_nu());
    let grid = make_grid(&nu, plan.m_nodes)?;
    let bx = plan.param_box.clone().unwrap_or_else(default_box);
    let family = builtin_family(FamilyKind::LocationScale);
    let (x, y) = (data.x(), data.y());
    let comps = vec![Component { sample: y, family: &family }];
    let crit = Criterion::new(x, comps, std::slice::from_ref(&bx), &grid, &plan.minimize)?;
    let fit = crit.minimize_base();
    let t_n = effective_size(x.len(), &[y.len()]);
    let mixes: Vec<f64> = plan.taus.iter().map(|t| t * t_n.sqrt()).collect();
    let mins = match &data {
        Generated::Independent { x, y } => {
            let (xs, ys) = (x.resample(&mut rng), y.resample(&mut rng));
            crit.minimize_replicate(&Replicate { base: &xs, comparisons: vec![&ys] }, &mixes)?
        }
        Generated::Matched(p) => {
            let star = p.resample(&mut rng);
            crit.minimize_replicate(&Replicate { base: star.x(), comparisons: vec![star.y()] }, &mixes)?
        }
    };
    Ok((t_n * fit.value, bootstrap_values(&fit, &mins, &plan.taus)))
}

/// Warp-speed rejection rates: for each design and `τ`, `ĉ(τ)` is the
/// `1 − α` quantile of `{B_r(τ)}` and the rate is `#{S_r > ĉ(τ)} / n_mc`.
pub fn warp_speed_study(plan: &StudyPlan) -> Result<RateTable> {
    plan.validate()?;
    let rows = plan
        .dgps
        .iter()
        .map(|spec| {
            let draws: Vec<(f64, Vec<f64>)> = (0..plan.n_mc as u64)
                .into_par_iter()
                .map(|r| replicate(plan, spec, r))
                .collect::<Result<_>>()?;
            let mut rates = Vec::with_capacity(plan.taus.len());
            let mut critical_values = Vec::with_capacity(plan.taus.len());
            for i in 0..plan.taus.len() {
                let boot: Vec<f64> = draws.iter().map(|d| d.1[i]).collect();
                let c = critical_value(&boot, plan.alpha)?;
                let hits = draws.iter().filter(|d| d.0 > c).count();
                rates.push(hits as f64 / plan.n_mc as f64);
                critical_values.push(c);
            }
            log::debug!("{spec}: rates {rates:?}");
            Ok(RateRow { spec: *spec, rates, critical_values })
        })
        .collect::<Result<_>>()?;
    Ok(RateTable { taus: plan.taus.clone(), n_mc: plan.n_mc, alpha: plan.alpha, rows })
}
