//! Transformation families `g(x, θ)` and the compact parameter boxes they
//! range over.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Default cap on the number of lattice points [`param_grid`] may produce.
pub const DEFAULT_LATTICE_CAP: usize = 1 << 24;

/// A transformation family `x ↦ g(x, θ)`, increasing in `x` for every `θ` in
/// its box.
///
/// Implementations must be pure. Monotonicity is the caller's obligation; the
/// test driver audits it by sampling (see [`audit_monotonicity`]) and reports
/// violations as diagnostics.
pub trait Transform: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Parameter dimension `d_θ`.
    fn dim(&self) -> usize;

    /// Unchecked evaluation. `theta.len() == self.dim()` and the parameter
    /// constraints are assumed to hold.
    fn eval(&self, x: f64, theta: &[f64]) -> f64;

    /// Checks dimension and any domain constraints on a single `θ`.
    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        Ok(())
    }

    /// Checks that every `θ` in the box is admissible.
    fn check_box(&self, b: &ParamBox) -> Result<()> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: b.dim() });
        }
        Ok(())
    }

    /// Checked evaluation.
    fn try_eval(&self, x: f64, theta: &[f64]) -> Result<f64> {
        self.check_params(theta)?;
        Ok(self.eval(x, theta))
    }
}

/// Axis-aligned compact box `Θ = Π [lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamBox {
    /// Degenerate dimensions (`lower_j == upper_j`) are allowed and pin the
    /// parameter.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBox("box needs at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidBox(format!(
                "lower has {} bounds but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBox(format!("bounds of dimension {j} must be finite")));
            }
            if lo > hi {
                return Err(Error::InvalidBox(format!(
                    "dimension {j}: lower bound {lo} exceeds upper bound {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// A box holding the single point `theta`.
    pub fn point(theta: Vec<f64>) -> Result<Self> {
        Self::new(theta.clone(), theta)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&t, (&lo, &hi))| lo <= t && t <= hi)
    }

    /// Projects `theta` onto the box.
    pub fn clamp(&self, theta: &mut [f64]) {
        for (t, (&lo, &hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(lo, hi);
        }
    }

    /// Equally spaced points on dimension `j`, endpoints included; the
    /// midpoint when `resolution == 1`.
    pub fn axis(&self, j: usize, resolution: usize) -> Vec<f64> {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if resolution == 1 {
            return vec![(lo + (hi - lo) * 0.5).clamp(lo, hi)];
        }
        let last = (resolution - 1) as f64;
        (0..resolution)
            .map(|i| if i + 1 == resolution { hi } else { (lo + (hi - lo) * (i as f64 / last)).min(hi) })
            .collect()
    }
}

/// Cartesian lattice over `b` in lexicographic order (first dimension
/// slowest), `Π resolution[j]` points in total.
pub fn param_grid(b: &ParamBox, resolution: &[usize], cap: usize) -> Result<Vec<Vec<f64>>> {
    if resolution.len() != b.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), got: resolution.len() });
    }
    if let Some(j) = resolution.iter().position(|&r| r == 0) {
        return Err(Error::Config(format!("resolution of dimension {j} must be at least 1")));
    }
    let count = resolution.iter().map(|&r| r as u128).product::<u128>();
    if count > cap as u128 {
        return Err(Error::LatticeTooLarge { count, cap });
    }
    let axes: Vec<Vec<f64>> = (0..b.dim()).map(|j| b.axis(j, resolution[j])).collect();
    let mut points = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; b.dim()];
    loop {
        points.push(idx.iter().enumerate().map(|(j, &i)| axes[j][i]).collect());
        let mut j = b.dim();
        loop {
            if j == 0 {
                return Ok(points);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < resolution[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Built-in family names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `g(x, θ) = x − θ₁`
    Location,
    /// `g(x, θ) = x / θ₂` with `θ₂ > 0`
    Scale,
    /// `g(x, θ) = (x − θ₁) / θ₂` with `θ₂ > 0`
    LocationScale,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "location" => Ok(Self::Location),
            "scale" => Ok(Self::Scale),
            "location-scale" | "location_scale" => Ok(Self::LocationScale),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected location, scale or location-scale)"
            ))),
        }
    }
}

/// Sign applied to the location parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    None,
    /// `x − θ₁`
    Minus,
    /// `x + θ₁`
    Plus,
}

/// How the scale parameter acts on the shifted value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    None,
    /// divide by `θ_last`
    Divide,
    /// multiply by `θ_last`
    Multiply,
}

/// Affine family `g(x, θ) = (x ∓ θ₁) ÷/× θ₂`, covering the three built-ins.
///
/// The location parameter, when present, comes first; the scale parameter
/// comes last and must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Affine {
    pub shift: Shift,
    pub scale: ScaleMode,
}

impl Affine {
    pub fn new(shift: Shift, scale: ScaleMode) -> Result<Self> {
        if shift == Shift::None && scale == ScaleMode::None {
            return Err(Error::Config("affine family needs a shift, a scale, or both".into()));
        }
        Ok(Self { shift, scale })
    }

    fn has_scale(&self) -> bool {
        self.scale != ScaleMode::None
    }
}

/// Returns the built-in family of the given kind.
pub fn builtin_family(kind: FamilyKind) -> Affine {
    match kind {
        FamilyKind::Location => Affine { shift: Shift::Minus, scale: ScaleMode::None },
        FamilyKind::Scale => Affine { shift: Shift::None, scale: ScaleMode::Divide },
        FamilyKind::LocationScale => Affine { shift: Shift::Minus, scale: ScaleMode::Divide },
    }
}

impl Transform for Affine {
    fn name(&self) -> String {
        match (self.shift, self.scale) {
            (Shift::Minus, ScaleMode::None) => "location".into(),
            (Shift::None, ScaleMode::Divide) => "scale".into(),
            (Shift::Minus, ScaleMode::Divide) => "location-scale".into(),
            (shift, scale) => format!("affine(shift={shift:?}, scale={scale:?})").to_lowercase(),
        }
    }

    fn dim(&self) -> usize {
        usize::from(self.shift != Shift::None) + usize::from(self.has_scale())
    }

    fn eval(&self, x: f64, theta: &[f64]) -> f64 {
        let shifted = match self.shift {
            Shift::None => x,
            Shift::Minus => x - theta[0],
            Shift::Plus => x + theta[0],
        };
        match self.scale {
            ScaleMode::None => shifted,
            ScaleMode::Divide => shifted / theta[theta.len() - 1],
            ScaleMode::Multiply => shifted * theta[theta.len() - 1],
        }
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        if self.has_scale() {
            let s = theta[theta.len() - 1];
            if !(s > 0.0) {
                return Err(Error::Domain(format!("scale parameter must be positive, got {s}")));
            }
        }
        Ok(())
    }

    fn check_box(&self, b: &ParamBox) -> Result<()> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: b.dim() });
        }
        if self.has_scale() {
            let lo = b.lower()[b.dim() - 1];
            if !(lo > 0.0) {
                return Err(Error::Domain(format!("scale parameter lower bound must be positive, got {lo}")));
            }
        }
        Ok(())
    }
}

/// Samples `family` on a `per_dim`-point lattice of `b` and the ascending
/// points `xs`, returning one message per `θ` at which the map decreases.
pub fn audit_monotonicity(family: &dyn Transform, b: &ParamBox, xs: &[f64], per_dim: usize) -> Vec<String> {
    let resolution = vec![per_dim.max(1); b.dim()];
    let Ok(lattice) = param_grid(b, &resolution, DEFAULT_LATTICE_CAP) else {
        return vec![format!("monotonicity audit skipped for {}: lattice too large", family.name())];
    };
    let mut warnings = Vec::new();
    for theta in &lattice {
        let bad = xs.windows(2).find(|w| {
            let (a, c) = (family.eval(w[0], theta), family.eval(w[1], theta));
            !(a <= c)
        });
        if let Some(w) = bad {
            warnings.push(format!(
                "{} is not nondecreasing at theta={theta:?}: g({}) > g({})",
                family.name(),
                w[0],
                w[1]
            ));
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builtin_examples() {
        let ls = builtin_family(FamilyKind::LocationScale);
        assert_eq!(ls.dim(), 2);
        assert_eq!(ls.eval(3.0, &[1.0, 2.0]), 1.0);
        let loc = builtin_family(FamilyKind::Location);
        assert_eq!(loc.dim(), 1);
        assert_eq!(loc.eval(3.0, &[0.0]), 3.0);
        let sc = builtin_family(FamilyKind::Scale);
        assert_eq!(sc.dim(), 1);
        assert_eq!(sc.eval(-4.0, &[2.0]), -2.0);
        assert_eq!(ls.name(), "location-scale");
        assert_eq!("location-scale".parse::<FamilyKind>().unwrap(), FamilyKind::LocationScale);
        assert!("warp".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn scale_domain_errors() {
        let ls = builtin_family(FamilyKind::LocationScale);
        assert!(matches!(ls.try_eval(1.0, &[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(ls.try_eval(1.0, &[0.0, -1.0]), Err(Error::Domain(_))));
        assert!(matches!(ls.try_eval(1.0, &[0.0]), Err(Error::DimensionMismatch { .. })));
        let b = ParamBox::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert!(ls.check_box(&b).is_err());
        let b = ParamBox::new(vec![-1.0, 0.5], vec![1.0, 2.0]).unwrap();
        assert!(ls.check_box(&b).is_ok());
    }

    #[test]
    fn affine_sign_conventions() {
        let f = Affine::new(Shift::Plus, ScaleMode::Multiply).unwrap();
        assert_eq!(f.eval(1.0, &[2.0, 3.0]), 9.0);
        assert!(Affine::new(Shift::None, ScaleMode::None).is_err());
    }

    #[test]
    fn box_validation() {
        assert!(ParamBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(ParamBox::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(ParamBox::new(vec![], vec![]).is_err());
        assert!(ParamBox::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(ParamBox::new(vec![2.0], vec![2.0]).is_ok());
    }

    #[test]
    fn grid_examples() {
        let b = ParamBox::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(param_grid(&b, &[3], 100).unwrap(), vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert_eq!(param_grid(&b, &[1], 100).unwrap(), vec![vec![0.5]]);

        let b = ParamBox::new(vec![0.0, 2.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(param_grid(&b, &[2, 1], 100).unwrap(), vec![vec![0.0, 2.0], vec![1.0, 2.0]]);

        let lo2 = 2f64.powf(-0.2);
        let hi2 = 2f64.powf(0.2);
        let b = ParamBox::new(vec![-0.2, lo2], vec![0.2, hi2]).unwrap();
        let g = param_grid(&b, &[41, 41], DEFAULT_LATTICE_CAP).unwrap();
        assert_eq!(g.len(), 1681);
        assert_eq!(g[0], vec![-0.2, lo2]);
        assert_eq!(g[1680], vec![0.2, hi2]);
        // first dimension is the slow one
        assert_eq!(g[1][0], -0.2);
        assert_eq!(g[41][1], lo2);
        assert!((g[41][0] + 0.19).abs() < 1e-15);
    }

    #[test]
    fn grid_errors() {
        let b = ParamBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(param_grid(&b, &[10, 10], 99), Err(Error::LatticeTooLarge { count: 100, cap: 99 })));
        assert!(param_grid(&b, &[0, 3], 99).is_err());
        assert!(param_grid(&b, &[3], 99).is_err());
    }

    #[test]
    fn audit_flags_decreasing_family() {
        #[derive(Debug)]
        struct Flip;
        impl Transform for Flip {
            fn name(&self) -> String {
                "flip".into()
            }
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, x: f64, theta: &[f64]) -> f64 {
                theta[0] * x
            }
        }
        let b = ParamBox::new(vec![-1.0], vec![1.0]).unwrap();
        let xs = [-1.0, 0.0, 1.0];
        let w = audit_monotonicity(&Flip, &b, &xs, 3);
        assert_eq!(w.len(), 1, "{w:?}");
        assert!(w[0].contains("flip"));
    }

    #[test]
    fn builtins_pass_monotonicity_audit() {
        let xs: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.37).collect();
        let cases = [
            (FamilyKind::Location, ParamBox::new(vec![-3.0], vec![3.0]).unwrap()),
            (FamilyKind::Scale, ParamBox::new(vec![0.1], vec![9.0]).unwrap()),
            (FamilyKind::LocationScale, ParamBox::new(vec![-2.0, 0.5], vec![0.0, 2.0]).unwrap()),
        ];
        for (kind, b) in cases {
            let f = builtin_family(kind);
            assert!(audit_monotonicity(&f, &b, &xs, 7).is_empty());
            for theta in param_grid(&b, &vec![7; b.dim()], 1000).unwrap() {
                for w in xs.windows(2) {
                    assert!(f.eval(w[0], &theta) < f.eval(w[1], &theta));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn identity_point(x in -1e9f64..1e9) {
            let ls = builtin_family(FamilyKind::LocationScale);
            prop_assert_eq!(ls.eval(x, &[0.0, 1.0]), x);
        }

        #[test]
        fn grid_points_in_box_and_uniform(
            lo in -10.0f64..10.0, span in 0.0f64..5.0,
            lo2 in -10.0f64..10.0, span2 in 0.0f64..5.0,
            r1 in 1usize..12, r2 in 1usize..12,
        ) {
            let b = ParamBox::new(vec![lo, lo2], vec![lo + span, lo2 + span2]).unwrap();
            let g = param_grid(&b, &[r1, r2], 1000).unwrap();
            prop_assert_eq!(g.len(), r1 * r2);
            for p in &g {
                prop_assert!(b.contains(p));
            }
            for j in 0..2 {
                let axis = b.axis(j, [r1, r2][j]);
                if axis.len() > 1 {
                    let step = (b.upper()[j] - b.lower()[j]) / (axis.len() - 1) as f64;
                    for w in axis.windows(2) {
                        prop_assert!(((w[1] - w[0]) - step).abs() <= 1e-12 * (1.0 + step.abs() + b.upper()[j].abs()));
                    }
                }
            }
            // lexicographic order
            for w in g.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
