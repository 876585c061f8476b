//! Declarative experiment configs.
//!
//! Every experiment is one TOML file: laws, tree, seeds and estimator
//! parameters, nothing implicit. Parsing is strict — unknown keys and
//! out-of-range values fail before any computation starts — and seeds are
//! mandatory, never auto-generated, because quenched experiments must be
//! replayable from the config alone.

use std::collections::BTreeMap;

use serde::Deserialize;

use bindweed::law::{EntryLaw, MatrixLaw, RateLaw};
use bindweed::matrix::Matrix;
use bindweed::tree::{BranchingSpec, Vertex};

use crate::CliError;

pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum TreeConfig {
    Constant {
        b: u32,
    },
    Periodic {
        levels: Vec<u32>,
    },
    Explicit {
        default: u32,
        #[serde(default)]
        overrides: Vec<OverrideConfig>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideConfig {
    pub vertex: Vec<u32>,
    pub children: u32,
}

impl TreeConfig {
    pub fn build(&self) -> Result<BranchingSpec, CliError> {
        let spec = match self {
            TreeConfig::Constant { b } => BranchingSpec::constant(*b),
            TreeConfig::Periodic { levels } => BranchingSpec::periodic(levels.clone()),
            TreeConfig::Explicit { default, overrides } => {
                let map: BTreeMap<Vertex, u32> = overrides
                    .iter()
                    .map(|o| (Vertex::from_word(o.vertex.clone()), o.children))
                    .collect();
                if map.len() != overrides.len() {
                    return Err(CliError::Config(
                        "duplicate vertex in tree overrides".to_string(),
                    ));
                }
                BranchingSpec::explicit(*default, map)
            }
        };
        spec.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum EntryLawConfig {
    Uniform { lo: f64, hi: f64 },
    TwoPoint { a: f64, p: f64, b: f64 },
    LogNormal { m: f64, s: f64 },
}

impl EntryLawConfig {
    pub fn build(&self) -> Result<EntryLaw, CliError> {
        let law = match self {
            EntryLawConfig::Uniform { lo, hi } => EntryLaw::uniform(*lo, *hi),
            EntryLawConfig::TwoPoint { a, p, b } => EntryLaw::two_point(*a, *p, *b),
            EntryLawConfig::LogNormal { m, s } => EntryLaw::log_normal(*m, *s),
        };
        law.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum LawConfig {
    PointMass {
        d: usize,
        /// Row-major entries.
        matrix: Vec<f64>,
    },
    FiniteSupport {
        d: usize,
        atoms: Vec<AtomConfig>,
    },
    IidEntries {
        d: usize,
        entry: EntryLawConfig,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub matrix: Vec<f64>,
    pub prob: f64,
}

fn matrix_from(d: usize, data: &[f64]) -> Result<Matrix, CliError> {
    Matrix::from_rows(d, data.to_vec()).map_err(|e| CliError::Config(e.to_string()))
}

impl LawConfig {
    pub fn build(&self) -> Result<MatrixLaw, CliError> {
        match self {
            LawConfig::PointMass { d, matrix } => {
                Ok(MatrixLaw::point_mass(matrix_from(*d, matrix)?))
            }
            LawConfig::FiniteSupport { d, atoms } => {
                let atoms: Result<Vec<(Matrix, f64)>, CliError> = atoms
                    .iter()
                    .map(|a| Ok((matrix_from(*d, &a.matrix)?, a.prob)))
                    .collect();
                MatrixLaw::finite_support(atoms?).map_err(|e| CliError::Config(e.to_string()))
            }
            LawConfig::IidEntries { d, entry } => MatrixLaw::iid_entries(*d, entry.build()?)
                .map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub d: usize,
    pub nu: EntryLawConfig,
    pub mu: EntryLawConfig,
}

impl RatesConfig {
    pub fn build(&self) -> Result<RateLaw, CliError> {
        RateLaw::new(self.d, self.nu.build()?, self.mu.build()?)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateKConfig {
    pub seed: u64,
    pub law: LawConfig,
    pub estimator: KGridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridConfig {
    pub s_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    pub replicas: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub seed: u64,
    pub tree: TreeConfig,
    pub law: Option<LawConfig>,
    pub rates: Option<RatesConfig>,
    pub estimator: LambdaEstimatorConfig,
    pub growth: GrowthConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaEstimatorConfig {
    pub grid: usize,
    pub tol: f64,
    pub n_list: Vec<usize>,
    pub replicas: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub n_max: usize,
    #[serde(default = "default_br_tol")]
    pub br_tol: f64,
}

fn default_br_tol() -> f64 {
    1e-3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub seed: u64,
    pub tree: TreeConfig,
    pub law: Option<LawConfig>,
    pub rates: Option<RatesConfig>,
    pub run: CascadeRunConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeRunConfig {
    pub n_max: usize,
    #[serde(default = "default_width_cap")]
    pub width_cap: usize,
}

fn default_width_cap() -> usize {
    1 << 22
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindweedConfig {
    pub seed: u64,
    pub tree: TreeConfig,
    pub rates: RatesConfig,
    pub sim: SimConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SimConfig {
    /// Long trajectories from the empty state, one CSV row per replica.
    Trajectories {
        sim_seed: u64,
        horizon: f64,
        replicas: usize,
        /// Optional truncation depths for an exact-chain comparison,
        /// reported on stdout.
        #[serde(default)]
        depths: Vec<usize>,
        #[serde(default = "default_max_states")]
        max_states: usize,
    },
    /// Exact stationary measure of the depth-truncated chain.
    Exact {
        depth: usize,
        #[serde(default = "default_max_states")]
        max_states: usize,
    },
}

fn default_max_states() -> usize {
    200_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosConfig {
    pub seed: u64,
    pub law: LawConfig,
    pub chaos: ChaosRunConfig,
    pub lambda: Option<LambdaEstimatorConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosRunConfig {
    pub b: usize,
    pub generations: usize,
    pub population: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Row-major entries of the initial particle; identity when omitted.
    pub init_matrix: Option<Vec<f64>>,
}

fn default_epsilon() -> f64 {
    0.05
}

/// Exactly one of `law` / `rates` must be present.
pub enum AnyLaw {
    Matrix(MatrixLaw),
    Rates(RateLaw),
}

pub fn pick_law(
    law: &Option<LawConfig>,
    rates: &Option<RatesConfig>,
) -> Result<AnyLaw, CliError> {
    match (law, rates) {
        (Some(l), None) => Ok(AnyLaw::Matrix(l.build()?)),
        (None, Some(r)) => Ok(AnyLaw::Rates(r.build()?)),
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either [law.*] or [rates], not both".to_string(),
        )),
        (None, None) => Err(CliError::Config(
            "a [law.*] or [rates] section is required".to_string(),
        )),
    }
}
