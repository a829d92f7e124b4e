//! The TOML run configuration.
//!
//! Every key is optional in the file; commands fill in defaults and flag
//! overrides, then echo the completed document at the top of the report so a
//! report can be fed back as `--config`. Relative data paths are resolved
//! against the directory of the configuration file.

use std::path::{Path, PathBuf};

use disttrans::criterion::{MinimizeSettings, NuMeasure};
use disttrans::hypothesis::Pairing;
use disttrans::transforms::{builtin_family, Affine, FamilyKind, ParamBox, ScaleMode, Shift, Transform};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_boot: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<NuSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimize: Option<MinimizeFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<ColumnSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<ColumnSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PairSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<ColumnSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<Vec<CompareSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gen: Option<GenSpec>,
}

/// `"auto"` or an explicit measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuSpec {
    Keyword(String),
    Measure(NuMeasure),
}

impl NuSpec {
    /// `None` means "place ν automatically".
    pub fn resolve(&self) -> CliResult<Option<NuMeasure>> {
        match self {
            NuSpec::Keyword(k) if k == "auto" => Ok(None),
            NuSpec::Keyword(k) => Err(CliError::Config(format!(
                "nu must be \"auto\", {{ mean, sd }} or {{ nodes }}, got \"{k}\""
            ))),
            NuSpec::Measure(m) => {
                m.validate().map_err(CliError::config)?;
                Ok(Some(m.clone()))
            }
        }
    }

    /// Parses the `--nu` flag: `auto` or `MEAN,SD`.
    pub fn from_flag(s: &str) -> CliResult<Self> {
        if s.trim() == "auto" {
            return Ok(NuSpec::Keyword("auto".into()));
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let parsed: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
        match parsed[..] {
            [mean, sd] if parts.len() == 2 => Ok(NuSpec::Measure(NuMeasure::Normal { mean, sd })),
            _ => Err(CliError::Config(format!("--nu expects `auto` or `MEAN,SD`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Resolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_shrink: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_cap: Option<usize>,
}

impl MinimizeFile {
    /// Fills every key with its default and returns the settings.
    pub fn complete(&mut self) -> CliResult<MinimizeSettings> {
        let d = MinimizeSettings::default();
        let resolution = match self.resolution.get_or_insert(Resolution::One(d.resolution[0])) {
            Resolution::One(r) => vec![*r],
            Resolution::Many(v) => v.clone(),
        };
        let settings = MinimizeSettings {
            resolution,
            refine: *self.refine.get_or_insert(d.refine),
            refine_shrink: *self.refine_shrink.get_or_insert(d.refine_shrink),
            refine_rounds: *self.refine_rounds.get_or_insert(d.refine_rounds),
            lattice_cap: *self.lattice_cap.get_or_insert(d.lattice_cap),
        };
        settings.validate().map_err(CliError::config)?;
        Ok(settings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSource {
    pub path: PathBuf,
    /// Header name; the first column when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSource {
    pub path: PathBuf,
    /// Header of the X column; the first column when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    /// Header of the Y column; the second column when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
}

/// A transformation family and its parameter box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// `location`, `scale`, `location-scale` or `affine`.
    pub kind: String,
    /// For `affine`: `minus`, `plus` or `none`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<String>,
    /// For `affine`: `divide`, `multiply` or `none`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FamilySpec {
    /// The family and a box it accepts.
    pub fn build(&self) -> CliResult<(Affine, ParamBox)> {
        let family = if self.kind == "affine" {
            let shift = match self.shift.as_deref().unwrap_or("minus") {
                "none" => Shift::None,
                "minus" => Shift::Minus,
                "plus" => Shift::Plus,
                other => return Err(CliError::Config(format!("unknown shift `{other}`"))),
            };
            let scale = match self.scale.as_deref().unwrap_or("divide") {
                "none" => ScaleMode::None,
                "divide" => ScaleMode::Divide,
                "multiply" => ScaleMode::Multiply,
                other => return Err(CliError::Config(format!("unknown scale `{other}`"))),
            };
            Affine::new(shift, scale).map_err(CliError::config)?
        } else {
            if self.shift.is_some() || self.scale.is_some() {
                return Err(CliError::Config(format!(
                    "shift and scale only apply to kind = \"affine\", not \"{}\"",
                    self.kind
                )));
            }
            builtin_family(self.kind.parse::<FamilyKind>().map_err(CliError::config)?)
        };
        let bx = ParamBox::new(self.lower.clone(), self.upper.clone()).map_err(CliError::config)?;
        family.check_box(&bx).map_err(CliError::config)?;
        Ok((family, bx))
    }
}

/// One `[[compare]]` entry: a sample with its own family and box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CompareSpec {
    pub fn source(&self) -> ColumnSource {
        ColumnSource { path: self.path.clone(), column: self.column.clone() }
    }

    pub fn family(&self) -> FamilySpec {
        FamilySpec {
            kind: self.kind.clone(),
            shift: self.shift.clone(),
            scale: self.scale.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dgps: Option<Vec<u8>>,
    /// `[n1, n2]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mc: Option<usize>,
    /// Overrides the default location-scale box.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dgp: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

impl FileConfig {
    /// Reads `path`, or returns an empty configuration when there is none.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(dir);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        for src in [&mut self.x, &mut self.y, &mut self.base].into_iter().flatten() {
            fix(&mut src.path);
        }
        if let Some(p) = &mut self.pairs {
            fix(&mut p.path);
        }
        for c in self.compare.iter_mut().flatten() {
            fix(&mut c.path);
        }
    }

    /// The completed document as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

pub fn parse_pairing(s: &str) -> CliResult<Pairing> {
    s.parse().map_err(CliError::config)
}

pub fn require<T>(value: Option<T>, what: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Config(format!("missing required setting `{what}`")))
}
