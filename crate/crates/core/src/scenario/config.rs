use std::path::Path;

use serde::{Deserialize, Serialize};

use super::wireless::{build_wireless_rmab, WirelessParams};
use crate::error::{Error, Result};
use crate::generators;
use crate::mdp::{MdpModel, StateSpace};
use crate::rmab::{ArmModel, RmabModel};

/// Version accepted in `schema_version`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub model: ModelConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Mdp(MdpConfig),
    Rmab(RmabConfig),
    Wireless(WirelessParams),
}

/// A single MDP: either inline tables (`actions`, `transitions[s][a][y]`,
/// `rewards[s][a]`, optional `dims`) or a `generator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpConfig {
    pub discount: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Random { states: usize, actions: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmabConfig {
    pub discount: f64,
    pub budget: usize,
    pub arms: Vec<ArmConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArmConfig {
    Tabular {
        #[serde(default)]
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dims: Option<Vec<usize>>,
        actions: usize,
        transitions: Vec<Vec<Vec<f64>>>,
        rewards: Vec<Vec<f64>>,
    },
    /// Self-loops under every level; `rewards[x][a]`.
    Static {
        #[serde(default)]
        label: String,
        rewards: Vec<Vec<f64>>,
    },
    /// Two actions sharing one transition matrix.
    ActionIndependent {
        #[serde(default)]
        label: String,
        transition: Vec<Vec<f64>>,
        passive: Vec<f64>,
        active: Vec<f64>,
    },
    Restart {
        #[serde(default)]
        label: String,
        active: Vec<f64>,
        drift: f64,
    },
    Random {
        #[serde(default)]
        label: String,
        states: usize,
        actions: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    Myopic,
    Lookahead,
    Whittle,
    Rollout,
    Optimal,
    GreedyBase,
}

impl PolicyName {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::Myopic => "myopic",
            PolicyName::Lookahead => "lookahead",
            PolicyName::Whittle => "whittle",
            PolicyName::Rollout => "rollout",
            PolicyName::Optimal => "optimal",
            PolicyName::GreedyBase => "greedy-base",
        }
    }
}

impl std::str::FromStr for PolicyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "myopic" => PolicyName::Myopic,
            "lookahead" => PolicyName::Lookahead,
            "whittle" => PolicyName::Whittle,
            "rollout" => PolicyName::Rollout,
            "optimal" => PolicyName::Optimal,
            "greedy-base" => PolicyName::GreedyBase,
            other => {
                return Err(Error::ConfigInvalid {
                    field: "policy".into(),
                    message: format!("unknown policy `{other}`"),
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub policies: Vec<PolicyName>,
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Per-arm start states; all zeros when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<usize>>,
    pub rollout: RolloutSection,
    pub index: IndexSection,
    pub solver: SolverSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            policies: vec![PolicyName::Myopic],
            episodes: 100,
            horizon: 50,
            seed: 0,
            initial_state: None,
            rollout: RolloutSection::default(),
            index: IndexSection::default(),
            solver: SolverSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutSection {
    pub trajectories: usize,
    pub horizon: usize,
    /// 0 selects the deterministic greedy base.
    pub epsilon0: f64,
    pub decay: f64,
    pub candidate_cap: usize,
}

impl Default for RolloutSection {
    fn default() -> Self {
        Self {
            trajectories: 32,
            horizon: 10,
            epsilon0: crate::nonindex::DEFAULT_EPSILON0,
            decay: crate::nonindex::DEFAULT_DECAY,
            candidate_cap: crate::nonindex::DEFAULT_CANDIDATE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMethodName {
    Exact,
    Mc,
    TwoTimescale,
}

impl IndexMethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            IndexMethodName::Exact => "exact",
            IndexMethodName::Mc => "mc",
            IndexMethodName::TwoTimescale => "two-timescale",
        }
    }
}

impl std::str::FromStr for IndexMethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => IndexMethodName::Exact,
            "mc" => IndexMethodName::Mc,
            "two-timescale" => IndexMethodName::TwoTimescale,
            other => {
                return Err(Error::ConfigInvalid {
                    field: "method".into(),
                    message: format!("unknown index method `{other}`"),
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexSection {
    pub method: IndexMethodName,
    pub grid_points: usize,
    pub tol_w: f64,
    pub trajectories: usize,
    pub horizon: usize,
    pub step_scale: f64,
    pub exponent: f64,
    pub tol: f64,
    pub max_outer: usize,
}

impl Default for IndexSection {
    fn default() -> Self {
        Self {
            method: IndexMethodName::Exact,
            grid_points: crate::whittle::DEFAULT_GRID_POINTS,
            tol_w: 1e-9,
            trajectories: 2000,
            horizon: 40,
            step_scale: 1.0,
            exponent: 0.6,
            tol: 0.01,
            max_outer: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_precision() -> usize {
    9
}

/// The model a scenario describes.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Mdp(MdpModel),
    Rmab(RmabModel),
}

impl BuiltModel {
    /// Bandit view: a single MDP becomes one arm whose budget admits every action.
    pub fn into_rmab(self) -> Result<RmabModel> {
        match self {
            BuiltModel::Rmab(m) => Ok(m),
            BuiltModel::Mdp(m) => {
                let budget = (m.num_actions() - 1).max(1);
                RmabModel::new(vec![ArmModel::new("mdp", m)], budget)
            }
        }
    }
}

fn invalid(field: impl Into<String>, e: Error) -> Error {
    match e {
        Error::ConfigInvalid { .. } | Error::ConfigParse(_) => e,
        other => Error::ConfigInvalid {
            field: field.into(),
            message: other.to_string(),
        },
    }
}

fn tabular(
    dims: &Option<Vec<usize>>,
    actions: usize,
    transitions: &[Vec<Vec<f64>>],
    rewards: &[Vec<f64>],
    discount: f64,
) -> Result<MdpModel> {
    let space = match dims {
        Some(d) => StateSpace::new(d.clone())?,
        None => StateSpace::flat(transitions.len())?,
    };
    MdpModel::from_dense(space, actions, transitions, rewards, discount)
}

impl ArmConfig {
    pub fn label(&self) -> &str {
        match self {
            ArmConfig::Tabular { label, .. }
            | ArmConfig::Static { label, .. }
            | ArmConfig::ActionIndependent { label, .. }
            | ArmConfig::Restart { label, .. }
            | ArmConfig::Random { label, .. } => label,
        }
    }

    pub fn build(&self, discount: f64) -> Result<MdpModel> {
        match self {
            ArmConfig::Tabular {
                dims,
                actions,
                transitions,
                rewards,
                ..
            } => tabular(dims, *actions, transitions, rewards, discount),
            ArmConfig::Static { rewards, .. } => generators::static_arm(rewards, discount),
            ArmConfig::ActionIndependent {
                transition,
                passive,
                active,
                ..
            } => generators::action_independent_arm(transition, passive, active, discount),
            ArmConfig::Restart { active, drift, .. } => generators::restart_arm(active, *drift, discount),
            ArmConfig::Random {
                states,
                actions,
                seed,
                ..
            } => generators::random_mdp(*states, *actions, discount, *seed),
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<BuiltModel> {
        match self {
            ModelConfig::Mdp(c) => {
                let m = match (c, &c.generator) {
                    (
                        MdpConfig {
                            actions: Some(actions),
                            transitions: Some(t),
                            rewards: Some(r),
                            generator: None,
                            ..
                        },
                        _,
                    ) => tabular(&c.dims, *actions, t, r, c.discount),
                    (
                        MdpConfig {
                            actions: None,
                            transitions: None,
                            rewards: None,
                            dims: None,
                            ..
                        },
                        Some(GeneratorConfig::Random { states, actions, seed }),
                    ) => generators::random_mdp(*states, *actions, c.discount, *seed),
                    _ => {
                        return Err(Error::ConfigInvalid {
                            field: "model".into(),
                            message: "give either `actions`, `transitions` and `rewards`, or a `generator`".into(),
                        })
                    }
                }
                .map_err(|e| invalid("model", e))?;
                Ok(BuiltModel::Mdp(m))
            }
            ModelConfig::Rmab(c) => {
                let arms = c
                    .arms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let m = a.build(c.discount).map_err(|e| invalid(format!("model.arms[{i}]"), e))?;
                        let label = if a.label().is_empty() {
                            format!("arm{i}")
                        } else {
                            a.label().to_string()
                        };
                        Ok(ArmModel::new(label, m))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BuiltModel::Rmab(RmabModel::new(arms, c.budget).map_err(|e| invalid("model", e))?))
            }
            ModelConfig::Wireless(p) => Ok(BuiltModel::Rmab(
                build_wireless_rmab(p).map_err(|e| invalid("model", e))?,
            )),
        }
    }
}

impl ScenarioConfig {
    /// Schema and model validation; builds the model once.
    pub fn validate(&self) -> Result<BuiltModel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::ConfigInvalid {
                field: "schema_version".into(),
                message: format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            });
        }
        if self.name.is_empty() {
            return Err(Error::ConfigInvalid {
                field: "name".into(),
                message: "must not be empty".into(),
            });
        }
        let e = &self.experiment;
        let positive = [
            ("experiment.episodes", e.episodes),
            ("experiment.horizon", e.horizon),
            ("experiment.rollout.trajectories", e.rollout.trajectories),
            ("experiment.rollout.horizon", e.rollout.horizon),
            ("experiment.rollout.candidate_cap", e.rollout.candidate_cap),
            ("experiment.index.grid_points", e.index.grid_points.saturating_sub(1)),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::ConfigInvalid {
                    field: field.into(),
                    message: "must be positive".into(),
                });
            }
        }
        if let Some(o) = &self.output {
            if o.precision == 0 || o.precision > 17 {
                return Err(Error::ConfigInvalid {
                    field: "output.precision".into(),
                    message: "must lie in 1..=17".into(),
                });
            }
        }
        let model = self.model.build()?;
        if let Some(x0) = &e.initial_state {
            let rmab = model.clone().into_rmab()?;
            rmab.check_state(x0).map_err(|err| invalid("experiment.initial_state", err))?;
        }
        Ok(model)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Per-arm start state.
    pub fn initial_state(&self, m: &RmabModel) -> Vec<usize> {
        self.experiment
            .initial_state
            .clone()
            .unwrap_or_else(|| vec![0; m.num_arms()])
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::ConfigParse(msg) => Error::ConfigParse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
