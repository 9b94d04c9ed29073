use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{
    value_iteration, DeterministicPolicy, GenerativeModel, MdpModel, Policy, StateSpace, ValueFunction,
};
use crate::stream::StreamRng;

/// Sweep cap for subsidized value iteration.
pub const SUBSIDY_MAX_SWEEPS: usize = 1_000_000;

/// How the subsidy enters the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsidyMode {
    /// `r(x,a) + W (1 - a)`; requires exactly two actions.
    TwoAction,
    /// `r(x,a) + W (M - a)`.
    MultiAction,
}

impl SubsidyMode {
    /// Two-action mode for binary arms, multi-action otherwise.
    pub fn for_arm(m: &MdpModel) -> Self {
        if m.num_actions() == 2 {
            SubsidyMode::TwoAction
        } else {
            SubsidyMode::MultiAction
        }
    }

    pub fn check(self, m: &MdpModel) -> Result<()> {
        if self == SubsidyMode::TwoAction && m.num_actions() != 2 {
            return Err(Error::param(
                "mode",
                format!("two-action subsidy needs 2 actions, arm has {}", m.num_actions()),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn subsidy(self, w: f64, action: usize, num_actions: usize) -> f64 {
        match self {
            SubsidyMode::TwoAction => w * (1.0 - action as f64),
            SubsidyMode::MultiAction => w * (num_actions - action) as f64,
        }
    }
}

/// Subsidy magnitude beyond which one extreme action is optimal in every
/// state: `2 R_max / (1 - beta)`, padded slightly so the endpoints are strict.
pub fn w_span(m: &MdpModel) -> f64 {
    2.0 * m.reward_bound() / (1.0 - m.discount()) * 1.01 + 1e-6
}

/// Same dynamics as `m`, rewards augmented by the subsidy `w`.
pub fn subsidized_model(m: &MdpModel, w: f64, mode: SubsidyMode) -> Result<MdpModel> {
    mode.check(m)?;
    if !w.is_finite() {
        return Err(Error::param("subsidy", format!("must be finite, got {w}")));
    }
    let a_count = m.num_actions();
    let rewards = m
        .rewards()
        .iter()
        .enumerate()
        .map(|(idx, r)| r + mode.subsidy(w, idx % a_count, a_count))
        .collect();
    m.with_rewards(rewards)
}

/// Value-iteration tolerance fine enough to resolve subsidy decisions.
pub(crate) fn decision_tol(m: &MdpModel) -> f64 {
    1e-12 * (w_span(m) / (1.0 - m.discount())).max(1.0)
}

#[derive(Debug, Clone)]
pub struct SubsidizedSolution {
    pub values: ValueFunction,
    /// Optimal level per state, lowest level on ties.
    pub policy: DeterministicPolicy,
}

/// Optimal value and policy of the arm with subsidy `w`.
pub fn subsidized_dp(m: &MdpModel, w: f64, mode: SubsidyMode, tol: f64) -> Result<SubsidizedSolution> {
    let sub = subsidized_model(m, w, mode)?;
    let res = value_iteration(&sub, tol, SUBSIDY_MAX_SWEEPS)?;
    Ok(SubsidizedSolution {
        values: res.values,
        policy: res.policy,
    })
}

/// Optimal levels at subsidy `w` with the default decision tolerance.
pub(crate) fn optimal_levels(m: &MdpModel, w: f64, mode: SubsidyMode) -> Result<Vec<usize>> {
    Ok(subsidized_dp(m, w, mode, decision_tol(m))?.policy.actions().to_vec())
}

/// States where passivity (level 0) is optimal at subsidy `w`, ascending.
pub fn passive_set(m: &MdpModel, w: f64) -> Result<Vec<usize>> {
    let levels = optimal_levels(m, w, SubsidyMode::for_arm(m))?;
    Ok(levels
        .iter()
        .enumerate()
        .filter(|(_, &a)| a == 0)
        .map(|(s, _)| s)
        .collect())
}

/// Generative view of an arm with subsidized rewards.
#[derive(Debug, Clone, Copy)]
pub struct SubsidizedGenerative<'a> {
    model: &'a MdpModel,
    w: f64,
    mode: SubsidyMode,
}

impl<'a> SubsidizedGenerative<'a> {
    pub fn new(model: &'a MdpModel, w: f64, mode: SubsidyMode) -> Result<Self> {
        mode.check(model)?;
        Ok(Self { model, w, mode })
    }
}

impl GenerativeModel for SubsidizedGenerative<'_> {
    fn num_states(&self) -> usize {
        self.model.num_states()
    }

    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn discount(&self) -> f64 {
        self.model.discount()
    }

    fn reward_bounds(&self) -> (f64, f64) {
        let m = self.model.num_actions();
        let lo = (0..m).map(|a| self.mode.subsidy(self.w, a, m)).fold(f64::INFINITY, f64::min);
        let hi = (0..m).map(|a| self.mode.subsidy(self.w, a, m)).fold(f64::NEG_INFINITY, f64::max);
        (self.model.reward_min() + lo, self.model.reward_max() + hi)
    }

    fn reward(&self, state: usize, action: usize) -> f64 {
        self.model.reward(state, action) + self.mode.subsidy(self.w, action, self.model.num_actions())
    }

    fn sample_next(&self, state: usize, action: usize, rng: &mut StreamRng) -> usize {
        self.model.sample_next(state, action, rng)
    }
}

/// Activates states above a threshold.
///
/// Scalar form: level `high` iff `state > threshold` on flat indices.
/// Region form: level `high` iff the state strictly dominates some member
/// of `gamma` in the componentwise order.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy {
    rule: ThresholdRule,
    low: usize,
    high: usize,
}

#[derive(Debug, Clone)]
enum ThresholdRule {
    Scalar(usize),
    Region { space: StateSpace, gamma: Vec<Vec<usize>> },
}

impl ThresholdPolicy {
    /// Two-action threshold policy: active iff `state > threshold`.
    pub fn scalar(threshold: usize) -> Self {
        Self::scalar_levels(threshold, 0, 1)
    }

    /// Plays `high` above the threshold and `low` at or below it.
    pub fn scalar_levels(threshold: usize, low: usize, high: usize) -> Self {
        Self {
            rule: ThresholdRule::Scalar(threshold),
            low,
            high,
        }
    }

    /// Region threshold; members of `gamma` must be mutually incomparable.
    pub fn region(space: StateSpace, gamma: Vec<Vec<usize>>) -> Result<Self> {
        for g in &gamma {
            space.encode(g)?;
        }
        for (i, a) in gamma.iter().enumerate() {
            for b in gamma.iter().skip(i + 1) {
                let le = a.iter().zip(b).all(|(x, y)| x <= y);
                let ge = a.iter().zip(b).all(|(x, y)| x >= y);
                if le || ge {
                    return Err(Error::param(
                        "gamma",
                        format!("threshold points {a:?} and {b:?} are comparable"),
                    ));
                }
            }
        }
        Ok(Self {
            rule: ThresholdRule::Region { space, gamma },
            low: 0,
            high: 1,
        })
    }

    pub fn is_high(&self, state: usize) -> bool {
        match &self.rule {
            ThresholdRule::Scalar(t) => state > *t,
            ThresholdRule::Region { space, gamma } => match space.decode(state) {
                Ok(c) => gamma
                    .iter()
                    .any(|g| g != &c && g.iter().zip(&c).all(|(gi, ci)| ci >= gi)),
                Err(_) => false,
            },
        }
    }
}

impl Policy for ThresholdPolicy {
    fn act(&self, state: usize, _step: usize, _rng: &mut StreamRng) -> usize {
        if self.is_high(state) {
            self.high
        } else {
            self.low
        }
    }
}
