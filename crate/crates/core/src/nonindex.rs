//! Rollout on the joint bandit without any indexability assumption.
//!
//! Candidate joint actions are scored by `sum_i r_i(x_i, a_i) + beta *
//! mean_l G_l`, where `G_l` follows a greedy (or epsilon-greedy) base
//! policy for `tau` steps after the first joint transition under the
//! candidate. Trajectory `l` uses the same stream for every candidate,
//! so candidates are compared under common random numbers.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rmab::{
    enumerate_feasible_actions, myopic_action, JointAction, JointPolicy, RmabModel, ACTION_ENUMERATION_LIMIT,
};
use crate::rollout::RolloutConfig;
use crate::stream::{derive_stream, StreamRng};

pub const DEFAULT_EPSILON0: f64 = 0.2;
pub const DEFAULT_DECAY: f64 = 0.95;
pub const DEFAULT_CANDIDATE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseMode {
    Deterministic,
    /// Explore with probability `epsilon0 * decay^t` at step `t`.
    EpsilonGreedy { epsilon0: f64, decay: f64 },
}

/// Greedy base policy: the myopic action, optionally mixed with uniform
/// draws from the feasible set.
#[derive(Debug, Clone)]
pub struct GreedyBasePolicy {
    mode: BaseMode,
    feasible: Vec<JointAction>,
}

impl GreedyBasePolicy {
    pub fn deterministic() -> Self {
        Self {
            mode: BaseMode::Deterministic,
            feasible: Vec::new(),
        }
    }

    /// Epsilon-greedy base; enumerates the feasible set of `m` once.
    pub fn epsilon_greedy(m: &RmabModel, epsilon0: f64, decay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon0) {
            return Err(Error::param("epsilon0", format!("must lie in [0, 1], got {epsilon0}")));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::param("decay", format!("must lie in (0, 1], got {decay}")));
        }
        Ok(Self {
            mode: BaseMode::EpsilonGreedy { epsilon0, decay },
            feasible: enumerate_feasible_actions(m)?,
        })
    }

    pub fn mode(&self) -> BaseMode {
        self.mode
    }

    /// Exploration probability at step `t`.
    pub fn epsilon(&self, t: usize) -> f64 {
        match self.mode {
            BaseMode::Deterministic => 0.0,
            BaseMode::EpsilonGreedy { epsilon0, decay } => epsilon0 * decay.powf(t as f64),
        }
    }

    /// Base action at step `t`. The epsilon-greedy mode always consumes
    /// one uniform from `rng`, plus one more when exploring.
    pub fn greedy_base_action(
        &self,
        m: &RmabModel,
        x: &[usize],
        t: usize,
        rng: &mut StreamRng,
    ) -> Result<JointAction> {
        if let BaseMode::EpsilonGreedy { .. } = self.mode {
            let u: f64 = rng.gen();
            if u < self.epsilon(t) {
                let k = rng.gen_range(0..self.feasible.len());
                return Ok(self.feasible[k].clone());
            }
        }
        myopic_action(m, x)
    }
}

impl JointPolicy for GreedyBasePolicy {
    fn decide(&self, m: &RmabModel, x: &[usize], step: usize, rng: &mut StreamRng) -> Result<JointAction> {
        self.greedy_base_action(m, x, step, rng)
    }
}

#[derive(Debug, Clone)]
pub struct JointRolloutDecision {
    pub action: JointAction,
    pub candidates: Vec<JointAction>,
    pub q_values: Vec<f64>,
    /// Unbiased standard deviation of the trajectory returns per candidate.
    pub std_devs: Vec<f64>,
    pub num_trajectories: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// Candidate joint actions at `x`: all of the feasible set when it has at
/// most `cap` members; otherwise the `cap` best by immediate reward
/// (always including the myopic action). When the feasible set is too
/// large to enumerate, the myopic action and its feasible single-arm
/// level changes.
pub fn candidate_actions(m: &RmabModel, x: &[usize], cap: usize) -> Result<Vec<JointAction>> {
    if cap == 0 {
        return Err(Error::param("candidate_cap", "must be at least 1"));
    }
    let myopic = myopic_action(m, x)?;
    if m.joint_action_count() > ACTION_ENUMERATION_LIMIT {
        let mut out = vec![myopic.clone()];
        for i in 0..m.num_arms() {
            for next in [myopic[i].wrapping_sub(1), myopic[i] + 1] {
                let mut a = myopic.clone();
                a[i] = next;
                if next != usize::MAX && m.is_feasible(&a) {
                    out.push(a);
                }
            }
        }
        out.truncate(cap.max(1));
        return Ok(out);
    }
    let all = enumerate_feasible_actions(m)?;
    if all.len() <= cap {
        return Ok(all);
    }
    let mut scored: Vec<(f64, JointAction)> = all.into_iter().map(|a| (m.joint_reward(x, &a), a)).collect();
    scored.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut out: Vec<JointAction> = scored.into_iter().take(cap).map(|(_, a)| a).collect();
    if !out.contains(&myopic) {
        let last = out.len() - 1;
        out[last] = myopic;
    }
    Ok(out)
}

fn trajectory_return(
    m: &RmabModel,
    x: &[usize],
    first: &[usize],
    base: &GreedyBasePolicy,
    horizon: usize,
    rng: &mut StreamRng,
) -> Result<f64> {
    let beta = m.discount();
    let mut y = m.step(x, first, rng);
    let mut total = 0.0;
    let mut weight = 1.0;
    for t in 0..horizon {
        let a = base.greedy_base_action(m, &y, t + 1, rng)?;
        m.check_action(t + 1, &a)?;
        total += weight * m.joint_reward(&y, &a);
        weight *= beta;
        m.step_into(&mut y, &a, rng);
    }
    Ok(total)
}

/// Rollout decision over the candidate set; ties go to the earliest candidate.
pub fn nonindexable_rollout_action(
    m: &RmabModel,
    x: &[usize],
    cfg: &RolloutConfig,
    base: &GreedyBasePolicy,
    candidate_cap: usize,
) -> Result<JointRolloutDecision> {
    cfg.validate()?;
    m.check_state(x)?;
    let candidates = candidate_actions(m, x, candidate_cap)?;
    if candidates.is_empty() {
        return Err(Error::Empty("candidate action list"));
    }
    let scored: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|a| {
            m.check_action(0, a)?;
            let returns: Vec<f64> = (0..cfg.num_trajectories)
                .into_par_iter()
                .map(|l| {
                    let mut rng = derive_stream(cfg.seed, &[l as u64]);
                    trajectory_return(m, x, a, base, cfg.horizon, &mut rng)
                })
                .collect::<Result<_>>()?;
            let n = returns.len() as f64;
            let mean = returns.iter().sum::<f64>() / n;
            let sd = if returns.len() > 1 {
                (returns.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            Ok((m.joint_reward(x, a) + m.discount() * mean, sd))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, &(q, _)) in scored.iter().enumerate() {
        if q > scored[best].0 {
            best = k;
        }
    }
    Ok(JointRolloutDecision {
        action: candidates[best].clone(),
        q_values: scored.iter().map(|p| p.0).collect(),
        std_devs: scored.iter().map(|p| p.1).collect(),
        candidates,
        num_trajectories: cfg.num_trajectories,
        horizon: cfg.horizon,
        seed: cfg.seed,
    })
}

/// Closed-loop rollout policy. Each decision draws its rollout seed from
/// the episode's decision stream.
#[derive(Debug, Clone)]
pub struct RolloutController {
    pub cfg: RolloutConfig,
    pub base: GreedyBasePolicy,
    pub candidate_cap: usize,
}

impl RolloutController {
    pub fn new(cfg: RolloutConfig, base: GreedyBasePolicy, candidate_cap: usize) -> Result<Self> {
        cfg.validate()?;
        if candidate_cap == 0 {
            return Err(Error::param("candidate_cap", "must be at least 1"));
        }
        Ok(Self {
            cfg,
            base,
            candidate_cap,
        })
    }

    /// Seed used for the decision at a step, given the decision stream.
    pub fn step_seed(rng: &mut StreamRng) -> u64 {
        rng.gen()
    }
}

impl JointPolicy for RolloutController {
    fn decide(&self, m: &RmabModel, x: &[usize], _step: usize, rng: &mut StreamRng) -> Result<JointAction> {
        let cfg = self.cfg.with_seed(Self::step_seed(rng));
        Ok(nonindexable_rollout_action(m, x, &cfg, &self.base, self.candidate_cap)?.action)
    }
}
