use serde::{Deserialize, Serialize};

use super::field::{CdfDiffField, Component, Replicate};
use super::quadrature::QuadratureGrid;
use crate::samples::UnivariateSample;
use crate::transforms::{param_grid, ParamBox, DEFAULT_LATTICE_CAP};
use crate::{Error, Result};

/// How the infimum over `Θ` is searched.
///
/// The objective is piecewise constant in `θ`, so the search is an exhaustive
/// lattice scan, optionally followed by a shrinking compass search around the
/// best lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeSettings {
    /// Points per dimension. A single entry applies to every dimension.
    pub resolution: Vec<usize>,
    pub refine: bool,
    pub refine_shrink: f64,
    pub refine_rounds: usize,
    pub lattice_cap: usize,
}

impl Default for MinimizeSettings {
    fn default() -> Self {
        Self {
            resolution: vec![41],
            refine: false,
            refine_shrink: 0.5,
            refine_rounds: 20,
            lattice_cap: DEFAULT_LATTICE_CAP,
        }
    }
}

impl MinimizeSettings {
    /// Lattice scan only, `r` points per dimension.
    pub fn lattice(r: usize) -> Self {
        Self { resolution: vec![r], ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution.is_empty() || self.resolution.contains(&0) {
            return Err(Error::Config("resolution entries must be at least 1".into()));
        }
        if !(self.refine_shrink > 0.0 && self.refine_shrink < 1.0) {
            return Err(Error::Config(format!(
                "refine_shrink must lie in (0, 1), got {}",
                self.refine_shrink
            )));
        }
        Ok(())
    }

    fn resolution_for(&self, dim: usize) -> Result<Vec<usize>> {
        match self.resolution.len() {
            1 => Ok(vec![self.resolution[0]; dim]),
            n if n == dim => Ok(self.resolution.clone()),
            n => Err(Error::DimensionMismatch { expected: dim, got: n }),
        }
    }
}

/// Result of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    /// Minimizer `θ̂_k` for each comparison.
    pub theta: Vec<Vec<f64>>,
    /// `L = Σ_k L_k`, summed in order of `k`.
    pub value: f64,
    /// Per-comparison minima `L_k`.
    pub components: Vec<f64>,
}

impl Minimum {
    fn assemble(parts: Vec<(Vec<f64>, f64)>) -> Self {
        let value = parts.iter().fold(0.0, |acc, p| acc + p.1);
        let (theta, components) = parts.into_iter().unzip();
        Self { theta, value, components }
    }
}

struct Scratch {
    u: Vec<f64>,
    g: Vec<f64>,
    gs: Vec<f64>,
    d: Vec<f64>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Self { u: vec![0.0; m], g: vec![0.0; m], gs: vec![0.0; m], d: vec![0.0; m] }
    }
}

/// Replicate with the base ECDF already evaluated at the nodes.
struct PreparedReplicate<'r> {
    base_at_nodes: Vec<f64>,
    comparisons: Vec<&'r UnivariateSample>,
}

/// Evaluates per-component sums `S_k(θ_k) = (1/m) Σ_j φ̃_k(x_j, θ_k)²`.
struct Evaluator<'a> {
    comps: Vec<Component<'a>>,
    nodes: Vec<f64>,
    base_at_nodes: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(base: &'a UnivariateSample, comps: Vec<Component<'a>>, grid: &QuadratureGrid) -> Self {
        let nodes = grid.nodes().to_vec();
        let mut base_at_nodes = vec![0.0; nodes.len()];
        base.ecdf_many(nodes.iter().copied(), &mut base_at_nodes);
        Self { comps, nodes, base_at_nodes }
    }

    fn prepare<'r>(&self, rep: &Replicate<'r>) -> Result<PreparedReplicate<'r>> {
        if rep.comparisons.len() != self.comps.len() {
            return Err(Error::Config(format!(
                "replicate has {} comparison samples, expected {}",
                rep.comparisons.len(),
                self.comps.len()
            )));
        }
        let mut base_at_nodes = vec![0.0; self.nodes.len()];
        rep.base.ecdf_many(self.nodes.iter().copied(), &mut base_at_nodes);
        Ok(PreparedReplicate { base_at_nodes, comparisons: rep.comparisons.clone() })
    }

    fn base_differences(&self, k: usize, theta: &[f64], u: &mut [f64], g: &mut [f64], d: &mut [f64]) {
        let comp = &self.comps[k];
        for (uj, &x) in u.iter_mut().zip(&self.nodes) {
            *uj = comp.family.eval(x, theta);
        }
        comp.sample.ecdf_many(u.iter().copied(), g);
        for ((dj, &f), &gj) in d.iter_mut().zip(&self.base_at_nodes).zip(g.iter()) {
            *dj = f - gj;
        }
    }

    /// Fills `sums[i]` with `S_k(θ)` under `mixes[i]` (a single base sum when
    /// `rep` is `None`). `cached` supplies precomputed base differences.
    #[allow(clippy::too_many_arguments)]
    fn component_sums(
        &self,
        k: usize,
        theta: &[f64],
        cached: Option<&[f64]>,
        rep: Option<&PreparedReplicate<'_>>,
        mixes: &[f64],
        scratch: &mut Scratch,
        sums: &mut [f64],
    ) {
        let m = self.nodes.len();
        let Scratch { u, g, gs, d } = scratch;
        let d: &[f64] = match cached {
            Some(row) => {
                if rep.is_some() {
                    let comp = &self.comps[k];
                    for (uj, &x) in u.iter_mut().zip(&self.nodes) {
                        *uj = comp.family.eval(x, theta);
                    }
                }
                row
            }
            None => {
                self.base_differences(k, theta, u, g, d);
                d
            }
        };
        match rep {
            None => {
                let mut s = 0.0;
                for &dj in d {
                    s += dj * dj;
                }
                sums[0] = s / m as f64;
            }
            Some(rep) => {
                rep.comparisons[k].ecdf_many(u.iter().copied(), gs);
                sums.iter_mut().for_each(|s| *s = 0.0);
                for j in 0..m {
                    let dj = d[j];
                    let ds = rep.base_at_nodes[j] - gs[j];
                    let delta = ds - dj;
                    for (s, &c) in sums.iter_mut().zip(mixes) {
                        let phi = dj + c * delta;
                        *s += phi * phi;
                    }
                }
                sums.iter_mut().for_each(|s| *s /= m as f64);
            }
        }
    }

    fn point_value(
        &self,
        k: usize,
        theta: &[f64],
        rep: Option<&PreparedReplicate<'_>>,
        mix: f64,
        scratch: &mut Scratch,
    ) -> f64 {
        let mut out = [0.0];
        self.component_sums(k, theta, None, rep, &[mix], scratch, &mut out);
        out[0]
    }
}

struct Lattice {
    points: Vec<Vec<f64>>,
    steps: Vec<f64>,
}

/// A prepared minimization problem: data, boxes, quadrature nodes and
/// lattices, reusable across many bootstrap replicates.
pub struct Criterion<'a> {
    eval: Evaluator<'a>,
    boxes: Vec<ParamBox>,
    settings: MinimizeSettings,
    lattices: Vec<Lattice>,
    table: Option<Vec<Vec<f64>>>,
}

impl<'a> Criterion<'a> {
    pub fn new(
        base: &'a UnivariateSample,
        comps: Vec<Component<'a>>,
        boxes: &[ParamBox],
        grid: &QuadratureGrid,
        settings: &MinimizeSettings,
    ) -> Result<Self> {
        settings.validate()?;
        if comps.is_empty() {
            return Err(Error::Config("at least one comparison is required".into()));
        }
        if boxes.len() != comps.len() {
            return Err(Error::Config(format!(
                "{} parameter boxes given for {} comparisons",
                boxes.len(),
                comps.len()
            )));
        }
        let mut lattices = Vec::with_capacity(boxes.len());
        for (comp, b) in comps.iter().zip(boxes) {
            comp.family.check_box(b)?;
            let resolution = settings.resolution_for(b.dim())?;
            let points = param_grid(b, &resolution, settings.lattice_cap)?;
            let steps = (0..b.dim())
                .map(|j| {
                    let span = b.upper()[j] - b.lower()[j];
                    match resolution[j] {
                        1 => span / 2.0,
                        r => span / (r - 1) as f64,
                    }
                })
                .collect();
            lattices.push(Lattice { points, steps });
        }
        Ok(Self {
            eval: Evaluator::new(base, comps, grid),
            boxes: boxes.to_vec(),
            settings: settings.clone(),
            lattices,
            table: None,
        })
    }

    /// Caches the unperturbed differences at every lattice point and node, so
    /// that each replicate only evaluates its own ECDFs. Memory is
    /// `Σ_k |lattice_k| × m` doubles.
    pub fn with_cached_differences(mut self) -> Self {
        let m = self.eval.nodes.len();
        let mut scratch = Scratch::new(m);
        let table = (0..self.lattices.len())
            .map(|k| {
                let mut rows = Vec::with_capacity(self.lattices[k].points.len() * m);
                for theta in &self.lattices[k].points {
                    let Scratch { u, g, d, .. } = &mut scratch;
                    self.eval.base_differences(k, theta, u, g, d);
                    rows.extend_from_slice(d);
                }
                rows
            })
            .collect();
        self.table = Some(table);
        self
    }

    pub fn lattice(&self, k: usize) -> &[Vec<f64>] {
        &self.lattices[k].points
    }

    pub fn k(&self) -> usize {
        self.lattices.len()
    }

    /// `L(φ̂)` for the unperturbed field.
    pub fn minimize_base(&self) -> Minimum {
        let per_mix = self.search(None, &[0.0]);
        Minimum::assemble(per_mix.into_iter().next().unwrap_or_default())
    }

    /// `L(φ̂ + c·(φ̂* − φ̂))` for every `c` in `mixes`, sharing one pass over the
    /// lattice. Entry `i` equals [`minimize`] on the field with mix `mixes[i]`.
    pub fn minimize_replicate(&self, rep: &Replicate<'_>, mixes: &[f64]) -> Result<Vec<Minimum>> {
        if let Some(c) = mixes.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::Config(format!("mix must be finite and nonnegative, got {c}")));
        }
        let prepared = self.eval.prepare(rep)?;
        Ok(self.search(Some(&prepared), mixes).into_iter().map(Minimum::assemble).collect())
    }

    /// Per mix, per component: best `(θ_k, L_k)`.
    fn search(&self, rep: Option<&PreparedReplicate<'_>>, mixes: &[f64]) -> Vec<Vec<(Vec<f64>, f64)>> {
        let m = self.eval.nodes.len();
        let mut scratch = Scratch::new(m);
        let width = if rep.is_some() { mixes.len() } else { 1 };
        let mut sums = vec![0.0; width];
        let mut out = vec![Vec::with_capacity(self.k()); width];
        for (k, lattice) in self.lattices.iter().enumerate() {
            let mut best = vec![(0usize, f64::INFINITY); width];
            for (p, theta) in lattice.points.iter().enumerate() {
                let cached = self.table.as_ref().map(|t| &t[k][p * m..(p + 1) * m]);
                self.eval.component_sums(k, theta, cached, rep, mixes, &mut scratch, &mut sums);
                for (b, &s) in best.iter_mut().zip(&sums) {
                    if p == 0 || s < b.1 {
                        *b = (p, s);
                    }
                }
            }
            for (i, &(p, value)) in best.iter().enumerate() {
                let start = lattice.points[p].clone();
                let found = if self.settings.refine {
                    let mix = if rep.is_some() { mixes[i] } else { 0.0 };
                    self.refine(k, start, value, rep, mix, &mut scratch)
                } else {
                    (start, value)
                };
                out[i].push(found);
            }
        }
        out
    }

    /// Compass search from a lattice point. Moves only on strict improvement,
    /// so the result never exceeds the lattice minimum.
    fn refine(
        &self,
        k: usize,
        mut theta: Vec<f64>,
        mut value: f64,
        rep: Option<&PreparedReplicate<'_>>,
        mix: f64,
        scratch: &mut Scratch,
    ) -> (Vec<f64>, f64) {
        let b = &self.boxes[k];
        let mut steps = self.lattices[k].steps.clone();
        for _ in 0..self.settings.refine_rounds {
            if steps.iter().all(|&s| s <= 0.0) {
                break;
            }
            let mut best: Option<(Vec<f64>, f64)> = None;
            for j in 0..theta.len() {
                if steps[j] <= 0.0 {
                    continue;
                }
                for sign in [-1.0, 1.0] {
                    let mut cand = theta.clone();
                    cand[j] += sign * steps[j];
                    b.clamp(&mut cand);
                    if cand == theta {
                        continue;
                    }
                    let v = self.eval.point_value(k, &cand, rep, mix, scratch);
                    let better = match &best {
                        None => true,
                        Some((bt, bv)) => v < *bv || (v == *bv && cand < *bt),
                    };
                    if better {
                        best = Some((cand, v));
                    }
                }
            }
            match best {
                Some((cand, v)) if v < value => {
                    theta = cand;
                    value = v;
                }
                _ => steps.iter_mut().for_each(|s| *s *= self.settings.refine_shrink),
            }
        }
        (theta, value)
    }
}

fn check_thetas(field: &CdfDiffField<'_>, boxes: &[ParamBox], thetas: &[Vec<f64>]) -> Result<()> {
    if boxes.len() != field.k() || thetas.len() != field.k() {
        return Err(Error::Config(format!(
            "field has {} comparisons but {} boxes and {} parameter vectors were given",
            field.k(),
            boxes.len(),
            thetas.len()
        )));
    }
    for ((comp, b), theta) in field.components().iter().zip(boxes).zip(thetas) {
        comp.family.check_params(theta)?;
        if !b.contains(theta) {
            return Err(Error::Domain(format!("theta {theta:?} lies outside its parameter box")));
        }
    }
    Ok(())
}

/// `S(θ) = Σ_k (1/m) Σ_j φ̃_k(x_j, θ_k)²` at one parameter vector per
/// comparison.
pub fn objective(
    field: &CdfDiffField<'_>,
    boxes: &[ParamBox],
    thetas: &[Vec<f64>],
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_thetas(field, boxes, thetas)?;
    let eval = Evaluator::new(field.base, field.comps.clone(), grid);
    let rep = field.replicate.as_ref().map(|r| eval.prepare(r)).transpose()?;
    let mut scratch = Scratch::new(grid.len());
    Ok(thetas
        .iter()
        .enumerate()
        .fold(0.0, |acc, (k, theta)| acc + eval.point_value(k, theta, rep.as_ref(), field.mix, &mut scratch)))
}

/// Minimizes the objective over the boxes. The criterion is separable, so each
/// comparison is minimized on its own and `L` is the sum of the parts.
pub fn minimize(
    field: &CdfDiffField<'_>,
    boxes: &[ParamBox],
    grid: &QuadratureGrid,
    settings: &MinimizeSettings,
) -> Result<Minimum> {
    let crit = Criterion::new(field.base, field.comps.clone(), boxes, grid, settings)?;
    match &field.replicate {
        None => Ok(crit.minimize_base()),
        Some(rep) => Ok(crit.minimize_replicate(rep, &[field.mix])?.remove(0)),
    }
}

/// [`minimize`] for several mixes of the same replicate in one pass.
pub fn minimize_over_mixes(
    field: &CdfDiffField<'_>,
    mixes: &[f64],
    boxes: &[ParamBox],
    grid: &QuadratureGrid,
    settings: &MinimizeSettings,
) -> Result<Vec<Minimum>> {
    let crit = Criterion::new(field.base, field.comps.clone(), boxes, grid, settings)?;
    match &field.replicate {
        None => Ok(vec![crit.minimize_base(); mixes.len()]),
        Some(rep) => crit.minimize_replicate(rep, mixes),
    }
}

/// Finite-difference second derivative
/// `[L(φ̂ + τh) − L(φ̂)] / τ²`, with `field_pert` carrying `τh` as its mix and
/// replicate. May be negative.
pub fn numerical_second_derivative(
    field_base: &CdfDiffField<'_>,
    field_pert: &CdfDiffField<'_>,
    tau: f64,
    boxes: &[ParamBox],
    grid: &QuadratureGrid,
    settings: &MinimizeSettings,
) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let base = minimize(field_base, boxes, grid, settings)?;
    let pert = minimize(field_pert, boxes, grid, settings)?;
    Ok((pert.value - base.value) / (tau * tau))
}
