//! Scenario configuration: a flat TOML file, command-line overrides, and
//! the fully resolved form echoed into every report.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::disjoin::audit_flow;
use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    CalculusCheck,
    Disjoin,
    Shorten,
    Index,
    Length,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CalculusCheck => "calculus-check",
            ScenarioKind::Disjoin => "disjoin",
            ScenarioKind::Shorten => "shorten",
            ScenarioKind::Index => "index",
            ScenarioKind::Length => "length",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Partial configuration, as read from a file or the command line. Every
/// field is optional; [`ConfigFile::merge`] layers overrides on top.
///
/// Keys: `kind`, `weights`, `alpha`, `d`, `a`, `b`, `area`, `eps`,
/// `eps_bar`, `delta`, `lambda`, `grid`, `t_nodes`, `steps`, `samples`,
/// `seed`, `format`, `out`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: Option<ScenarioKind>,
    pub weights: Option<Vec<u32>>,
    pub alpha: Option<f64>,
    pub d: Option<f64>,
    pub a: Option<u32>,
    pub b: Option<u32>,
    pub area: Option<f64>,
    pub eps: Option<f64>,
    pub eps_bar: Option<f64>,
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub grid: Option<usize>,
    pub t_nodes: Option<usize>,
    pub steps: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

macro_rules! layer {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` with every field set in `top` replaced (flags win).
    pub fn merge(mut self, top: &ConfigFile) -> Self {
        layer!(self, top; kind, weights, alpha, d, a, b, area, eps, eps_bar, delta, lambda,
               grid, t_nodes, steps, samples, seed, format, out);
        self
    }

    /// Fills defaults for the chosen scenario and validates ranges.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let kind = self
            .kind
            .ok_or_else(|| Error::InvalidParameter("no scenario kind given".into()))?;
        let d = Defaults::for_kind(kind);
        let cfg = ScenarioConfig {
            kind,
            weights: self.weights.clone().unwrap_or_else(|| d.weights.clone()),
            alpha: self.alpha.unwrap_or(1.0),
            d: self.d.unwrap_or(0.9),
            a: self.a,
            b: self.b,
            area: self.area.unwrap_or(1.0),
            eps: self.eps.unwrap_or(0.1),
            eps_bar: self.eps_bar,
            delta: self.delta,
            lambda: self.lambda.unwrap_or(0.0),
            grid: self.grid.unwrap_or(d.grid),
            t_nodes: self.t_nodes.unwrap_or(257),
            steps: self.steps.unwrap_or(d.steps),
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(0),
            format: self.format.unwrap_or_default(),
            out: self.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Defaults {
    weights: Vec<u32>,
    grid: usize,
    steps: usize,
    samples: usize,
}

impl Defaults {
    fn for_kind(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::CalculusCheck => Defaults {
                weights: vec![1, 1],
                grid: 0,
                steps: 2000,
                samples: 100,
            },
            ScenarioKind::Disjoin => Defaults {
                weights: vec![1],
                grid: 0,
                steps: audit_flow().steps,
                samples: 1000,
            },
            ScenarioKind::Shorten => Defaults {
                weights: vec![3, 1],
                grid: 25,
                steps: 2000,
                samples: 200,
            },
            ScenarioKind::Index => Defaults {
                weights: vec![3],
                grid: 21,
                steps: 4000,
                samples: 20,
            },
            ScenarioKind::Length => Defaults {
                weights: vec![2, 1],
                grid: 0,
                steps: 4000,
                samples: 50,
            },
        }
    }
}

/// Fully resolved configuration; serialized verbatim into the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub weights: Vec<u32>,
    pub alpha: f64,
    /// Gap parameter of the shortening theorem.
    pub d: f64,
    /// Split `k₁ = a + b`; canonical when absent.
    pub a: Option<u32>,
    pub b: Option<u32>,
    /// Target inner area of the disc disjoiner.
    pub area: f64,
    pub eps: f64,
    /// Ambient slack; derived from the containment bound when absent.
    pub eps_bar: Option<f64>,
    /// Uniform collar width of the disc disjoiner; measured when absent.
    pub delta: Option<f64>,
    /// Deformation size along the first parameter (length scenario).
    pub lambda: f64,
    /// Cloud levels (shorten) or λ-grid points (index).
    pub grid: usize,
    pub t_nodes: usize,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub format: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn bad(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.contains(&0) {
            return Err(bad(format!("weights must be positive integers, got {:?}", self.weights)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(bad(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.a.is_some() != self.b.is_some() {
            return Err(bad("a and b must be given together".into()));
        }
        if let Some(e) = self.eps_bar {
            if !(e > 0.0 && e.is_finite()) {
                return Err(bad(format!("eps-bar must be positive, got {e}")));
            }
        }
        if let Some(dl) = self.delta {
            if !(dl > 0.0 && dl.is_finite()) {
                return Err(bad(format!("delta must be positive, got {dl}")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(bad("lambda must be finite".into()));
        }
        quadrature::check_simpson_nodes(self.t_nodes)?;
        if self.steps == 0 || self.samples == 0 {
            return Err(bad("steps and samples must be positive".into()));
        }
        match self.kind {
            ScenarioKind::Shorten if self.grid < 2 => Err(bad("shorten needs grid ≥ 2".into())),
            ScenarioKind::Index if self.grid < 2 => Err(bad("index needs grid ≥ 2".into())),
            _ => Ok(()),
        }
    }
}
