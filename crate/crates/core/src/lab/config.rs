//! Experiment configuration: one TOML document, unknown keys rejected.  Every section has
//! defaults, so an empty document is valid.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffnorm::DEFAULT_SEED;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lab::params::SpaceParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.half_width, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormPair {
    /// Ball-average difference norm.
    Va,
    Modulus,
    Club,
    Spade,
}

impl NormPair {
    pub fn name(&self) -> &'static str {
        match self {
            NormPair::Va => "va",
            NormPair::Modulus => "modulus",
            NormPair::Club => "club",
            NormPair::Spade => "spade",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionFamily {
    /// Seeded smooth windowed cosine sums.
    Seeded,
    /// Smooth bumps of varying radius, translated on the grid.
    Bumps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalenceConfig {
    pub params: SpaceParams,
    pub pair: NormPair,
    pub family: FunctionFamily,
    pub count: usize,
    pub grid: GridSpec,
    pub k_max: usize,
    /// Acceptance envelope for max ratio / min ratio.
    pub max_spread: f64,
    /// Acceptance bound on the relative ratio change under one refinement.
    pub max_change: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            params: SpaceParams {
                d: 1,
                s: 1.5,
                u: 2.0,
                p: 1.5,
                q: 2.0,
                v: 2.0,
                a: f64::INFINITY,
                order: 2,
            },
            pair: NormPair::Va,
            family: FunctionFamily::Seeded,
            count: 20,
            grid: GridSpec {
                dim: 1,
                half_width: 8.0,
                n: 4096,
            },
            k_max: 8,
            max_spread: 50.0,
            max_change: 0.10,
        }
    }
}

impl EquivalenceConfig {
    /// The modulus-of-smoothness variant of the default run.
    pub fn modulus() -> Self {
        let base = Self::default();
        Self {
            pair: NormPair::Modulus,
            params: SpaceParams { s: 1.2, ..base.params },
            ..base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Plateau bump with `s = 0`: partials against the level cap `T`.
    PlateauS0,
    /// Exponential bump with `N <= s`: partials against the lower level `eps`.
    ExpBump,
    /// Lacunary sum with `N = s`, `q = inf`, `p = u`: witness against `l`.
    Oswald,
    /// Singular function outside its space: block growth against the band index.
    FAlphaDelta,
    /// Smooth bump in the equivalence regime through the plateau pipeline.
    Control,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::PlateauS0 => "plateau-s0",
            Scenario::ExpBump => "exp-bump",
            Scenario::Oswald => "oswald",
            Scenario::FAlphaDelta => "f-alpha-delta",
            Scenario::Control => "control",
        }
    }

    pub fn all() -> [Scenario; 5] {
        [
            Scenario::PlateauS0,
            Scenario::ExpBump,
            Scenario::Oswald,
            Scenario::FAlphaDelta,
            Scenario::Control,
        ]
    }
}

/// One divergence run.  Unset fields take the scenario's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub params: Option<SpaceParams>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Divergence parameter values: `T`, `eps`, `l` or band indices.
    #[serde(default)]
    pub points: Option<Vec<f64>>,
    /// `f_{alpha,delta}` only.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

impl DivergenceConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            params: None,
            grid: None,
            points: None,
            alpha: None,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MembershipConfig {
    pub alpha: f64,
    pub delta: f64,
    pub theta: f64,
    pub d: usize,
    pub u: f64,
    pub p: f64,
    pub q: f64,
    pub s_values: Vec<f64>,
    pub grid: GridSpec,
    pub k_max: usize,
    /// Bands used for the slope fit.
    pub window: (usize, usize),
    /// Scan points closer than this to the threshold are excluded.
    pub boundary: f64,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            alpha: -0.25,
            delta: 0.0,
            theta: 0.45,
            d: 1,
            u: 2.0,
            p: 2.0,
            q: 2.0,
            s_values: vec![0.05, 0.15, 0.25, 0.35, 0.45],
            grid: GridSpec {
                dim: 1,
                half_width: 4.0,
                n: 32768,
            },
            k_max: 12,
            window: (6, 10),
            boundary: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub classify: Vec<SpaceParams>,
    #[serde(default)]
    pub equivalence: Vec<EquivalenceConfig>,
    #[serde(default)]
    pub divergence: Vec<DivergenceConfig>,
    #[serde(default)]
    pub membership: Vec<MembershipConfig>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            classify: Vec::new(),
            equivalence: Vec::new(),
            divergence: Vec::new(),
            membership: Vec::new(),
        }
    }
}

impl LabConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Replaces the points per axis of every grid in the document, materializing scenario default
    /// grids first.  Scenarios without a grid are left alone.
    pub fn override_grid_n(&mut self, n: usize) {
        for e in &mut self.equivalence {
            e.grid.n = n;
        }
        for m in &mut self.membership {
            m.grid.n = n;
        }
        for d in &mut self.divergence {
            if d.grid.is_none() {
                d.grid = crate::lab::divergence::defaults(d.scenario).1;
            }
            if let Some(g) = d.grid.as_mut() {
                g.n = n;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_valid() {
        let c = LabConfig::parse("").unwrap();
        assert_eq!(c, LabConfig::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(LabConfig::parse("sed = 3").is_err());
        assert!(LabConfig::parse("[[equivalence]]\ncuont = 3").is_err());
    }

    #[test]
    fn parses_sections() {
        let text = r#"
seed = 7
[[classify]]
d = 1
s = 1.5
u = 2.0
p = 1.5
q = 2.0
v = 2.0
N = 2

[[equivalence]]
pair = "modulus"
count = 3

[[divergence]]
scenario = "plateau-s0"
points = [8.0, 16.0]

[[membership]]
s_values = [0.1]
"#;
        let c = LabConfig::parse(text).unwrap();
        assert_eq!(c.seed, 7);
        assert!(c.classify[0].a.is_infinite());
        assert_eq!(c.equivalence[0].pair, NormPair::Modulus);
        assert_eq!(c.equivalence[0].grid.n, 4096);
        assert_eq!(c.divergence[0].scenario, Scenario::PlateauS0);
        assert_eq!(c.membership[0].k_max, 12);
    }
}
