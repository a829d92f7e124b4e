use crate::samples::UnivariateSample;
use crate::transforms::Transform;
use crate::{Error, Result};

/// One comparison sample `Y_k` and its family `g_k`.
#[derive(Debug, Clone, Copy)]
pub struct Component<'a> {
    pub sample: &'a UnivariateSample,
    pub family: &'a dyn Transform,
}

/// A bootstrap replicate of the base sample and of every comparison sample.
#[derive(Debug, Clone)]
pub struct Replicate<'a> {
    pub base: &'a UnivariateSample,
    pub comparisons: Vec<&'a UnivariateSample>,
}

/// The difference field `φ_k(x, θ_k) = F̂(x) − Ĝ_k(g_k(x, θ_k))`, optionally
/// pushed toward a bootstrap replicate.
///
/// With a replicate and mix `c` the value is
/// `φ̃ = d + c·(d* − d)` where `d = F̂(x) − Ĝ_k(g_k(x, θ_k))` and
/// `d* = F̂*(x) − Ĝ_k*(g_k(x, θ_k))`. In the numerical bootstrap
/// `c = τ·√Tₙ`, so `φ̃ = φ̂ + τ·√Tₙ(φ̂* − φ̂)`. This is the exact
/// floating-point expression used everywhere; `c = 0` or `d* = d` reproduce
/// `d` bit for bit.
#[derive(Debug, Clone)]
pub struct CdfDiffField<'a> {
    pub(crate) base: &'a UnivariateSample,
    pub(crate) comps: Vec<Component<'a>>,
    pub(crate) replicate: Option<Replicate<'a>>,
    pub(crate) mix: f64,
}

impl<'a> CdfDiffField<'a> {
    pub fn new(base: &'a UnivariateSample, comps: Vec<Component<'a>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::Config("a difference field needs at least one comparison".into()));
        }
        Ok(Self { base, comps, replicate: None, mix: 0.0 })
    }

    /// Two-sample convenience constructor.
    pub fn two_sample(x: &'a UnivariateSample, y: &'a UnivariateSample, family: &'a dyn Transform) -> Self {
        Self { base: x, comps: vec![Component { sample: y, family }], replicate: None, mix: 0.0 }
    }

    /// Attaches a bootstrap replicate with mixing weight `mix >= 0`.
    pub fn perturbed(mut self, replicate: Replicate<'a>, mix: f64) -> Result<Self> {
        if replicate.comparisons.len() != self.comps.len() {
            return Err(Error::Config(format!(
                "replicate has {} comparison samples, field has {}",
                replicate.comparisons.len(),
                self.comps.len()
            )));
        }
        if !(mix >= 0.0) || !mix.is_finite() {
            return Err(Error::Config(format!("mix must be finite and nonnegative, got {mix}")));
        }
        self.replicate = Some(replicate);
        self.mix = mix;
        Ok(self)
    }

    /// Same data and replicate, different mix.
    pub fn with_mix(&self, mix: f64) -> Self {
        Self { mix, ..self.clone() }
    }

    pub fn k(&self) -> usize {
        self.comps.len()
    }

    pub fn mix(&self) -> f64 {
        self.mix
    }

    pub fn components(&self) -> &[Component<'a>] {
        &self.comps
    }

    pub fn base(&self) -> &'a UnivariateSample {
        self.base
    }

    pub fn replicate(&self) -> Option<&Replicate<'a>> {
        self.replicate.as_ref()
    }

    /// Pointwise value `φ̃_k(x, θ_k)`.
    pub fn value(&self, k: usize, x: f64, theta: &[f64]) -> f64 {
        let comp = &self.comps[k];
        let u = comp.family.eval(x, theta);
        let d = self.base.ecdf(x) - comp.sample.ecdf(u);
        match &self.replicate {
            None => d,
            Some(rep) => {
                let ds = rep.base.ecdf(x) - rep.comparisons[k].ecdf(u);
                d + self.mix * (ds - d)
            }
        }
    }
}
