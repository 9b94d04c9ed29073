//! Monte Carlo rollout and parallel rollout over a [`GenerativeModel`].
//!
//! Trajectory `l` for the pair `(x, a)` always draws from the stream
//! derived from `(seed, x, a, l)`. Returns are collected in trajectory
//! order and summed sequentially, so estimates do not depend on the
//! number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{GenerativeModel, Policy};
use crate::stream::{derive_stream, StreamRng};

/// Label used in place of an action when estimating a state value.
const VALUE_LABEL: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutConfig {
    /// Trajectories per state-action pair (`L`).
    pub num_trajectories: usize,
    /// Steps simulated after the first transition (`tau`).
    pub horizon: usize,
    pub seed: u64,
}

impl RolloutConfig {
    pub fn new(num_trajectories: usize, horizon: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            num_trajectories,
            horizon,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trajectories == 0 {
            return Err(Error::param("num_trajectories", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryReturn {
    pub value: f64,
    pub index: usize,
    pub state: usize,
    pub action: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEstimate {
    pub value: f64,
    /// Mean of the trajectory returns that enter the estimate.
    pub mean_return: f64,
    pub sample_count: usize,
    /// Unbiased standard deviation of the returns; 0 for a single sample.
    pub sample_std_dev: f64,
}

/// Closed interval containing every `tau`-step discounted return.
pub fn return_range(bounds: (f64, f64), beta: f64, horizon: usize) -> (f64, f64) {
    let scale = (1.0 - beta.powi(horizon as i32)) / (1.0 - beta);
    (bounds.0 * scale, bounds.1 * scale)
}

fn checked_act<G, P>(g: &G, p: &P, state: usize, step: usize, rng: &mut StreamRng) -> Result<usize>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    let a = p.act(state, step, rng);
    g.check_action(state, a)?;
    Ok(a)
}

/// Discounted return of `horizon` steps following `p` from `state`;
/// the policy sees step numbers `first_step, first_step + 1, ...`.
fn follow<G, P>(
    g: &G,
    p: &P,
    mut state: usize,
    horizon: usize,
    first_step: usize,
    rng: &mut StreamRng,
) -> Result<f64>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    let beta = g.discount();
    let mut total = 0.0;
    let mut weight = 1.0;
    for t in 0..horizon {
        let a = checked_act(g, p, state, first_step + t, rng)?;
        let (next, r) = g.sample(state, a, rng);
        total += weight * r;
        weight *= beta;
        state = next;
    }
    Ok(total)
}

/// One trajectory: the first step uses `start_action`, later steps use `p`.
/// Returns `sum_{t<horizon} beta^t r_t`.
pub fn simulate_trajectory<G, P>(
    g: &G,
    p: &P,
    start_state: usize,
    start_action: usize,
    horizon: usize,
    rng: &mut StreamRng,
) -> Result<TrajectoryReturn>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    if horizon == 0 {
        return Err(Error::param("horizon", "must be at least 1"));
    }
    g.check_action(start_state, start_action)?;
    let (next, r0) = g.sample(start_state, start_action, rng);
    let rest = follow(g, p, next, horizon - 1, 1, rng)?;
    Ok(TrajectoryReturn {
        value: r0 + g.discount() * rest,
        index: 0,
        state: start_state,
        action: start_action,
    })
}

fn summarize(returns: &[f64]) -> (f64, f64) {
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    if returns.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = returns.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Returns of the `L` trajectories started from `y_1 ~ P(.|x,a)`.
pub fn rollout_returns<G, P>(
    g: &G,
    p: &P,
    state: usize,
    action: usize,
    cfg: &RolloutConfig,
) -> Result<Vec<TrajectoryReturn>>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    cfg.validate()?;
    g.check_action(state, action)?;
    (0..cfg.num_trajectories)
        .into_par_iter()
        .map(|l| {
            let mut rng = derive_stream(cfg.seed, &[state as u64, action as u64, l as u64]);
            let y = g.sample_next(state, action, &mut rng);
            let value = follow(g, p, y, cfg.horizon, 1, &mut rng)?;
            Ok(TrajectoryReturn {
                value,
                index: l,
                state,
                action,
            })
        })
        .collect()
}

/// `Q(x,a) = r(x,a) + beta * mean_l G_l` where `G_l` is the `tau`-step
/// return of `p` from a fresh successor of `(x, a)`.
pub fn mc_rollout_qvalue<G, P>(
    g: &G,
    p: &P,
    state: usize,
    action: usize,
    cfg: &RolloutConfig,
) -> Result<QEstimate>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    let returns: Vec<f64> = rollout_returns(g, p, state, action, cfg)?
        .into_iter()
        .map(|t| t.value)
        .collect();
    let (mean, sd) = summarize(&returns);
    Ok(QEstimate {
        value: g.reward(state, action) + g.discount() * mean,
        mean_return: mean,
        sample_count: returns.len(),
        sample_std_dev: sd,
    })
}

/// Monte Carlo estimate of `V_{p,tau}(x)`: mean `tau`-step return of `p` from `x`.
pub fn mc_value_estimate<G, P>(g: &G, p: &P, state: usize, cfg: &RolloutConfig) -> Result<QEstimate>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    cfg.validate()?;
    let returns: Vec<f64> = (0..cfg.num_trajectories)
        .into_par_iter()
        .map(|l| {
            let mut rng = derive_stream(cfg.seed, &[state as u64, VALUE_LABEL, l as u64]);
            follow(g, p, state, cfg.horizon, 0, &mut rng)
        })
        .collect::<Result<_>>()?;
    let (mean, sd) = summarize(&returns);
    Ok(QEstimate {
        value: mean,
        mean_return: mean,
        sample_count: returns.len(),
        sample_std_dev: sd,
    })
}

fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone)]
pub struct RolloutDecision {
    pub action: usize,
    pub estimates: Vec<QEstimate>,
}

/// Rollout improvement of `p` at `state`: argmax over actions of the
/// Monte Carlo Q estimate, lowest action on ties.
pub fn rollout_policy_action<G, P>(
    g: &G,
    p: &P,
    state: usize,
    cfg: &RolloutConfig,
) -> Result<RolloutDecision>
where
    G: GenerativeModel + ?Sized,
    P: Policy + ?Sized,
{
    if g.num_actions() == 0 {
        return Err(Error::Empty("action set"));
    }
    let estimates = (0..g.num_actions())
        .map(|a| mc_rollout_qvalue(g, p, state, a, cfg))
        .collect::<Result<Vec<_>>>()?;
    let action = argmax(estimates.iter().map(|q| q.value)).ok_or(Error::Empty("action set"))?;
    Ok(RolloutDecision { action, estimates })
}

#[derive(Debug, Clone)]
pub struct ParallelRolloutDecision {
    pub action: usize,
    /// `per_policy[k][a]`: estimate for policy `k`, action `a`.
    pub per_policy: Vec<Vec<QEstimate>>,
    /// `r(x,a) + beta * max_k mean_return[k][a]`.
    pub combined: Vec<f64>,
    /// Policy attaining the max for each action; lowest index on ties.
    pub best_policy: Vec<usize>,
}

/// Parallel rollout over the policy set `policies`. All policies share
/// the trajectory streams of each `(x, a)` pair.
pub fn parallel_rollout_action<G, P>(
    g: &G,
    policies: &[P],
    state: usize,
    cfg: &RolloutConfig,
) -> Result<ParallelRolloutDecision>
where
    G: GenerativeModel + ?Sized,
    P: Policy,
{
    if policies.is_empty() {
        return Err(Error::Empty("policy set"));
    }
    if g.num_actions() == 0 {
        return Err(Error::Empty("action set"));
    }
    let per_policy = policies
        .iter()
        .map(|p| {
            (0..g.num_actions())
                .map(|a| mc_rollout_qvalue(g, p, state, a, cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut combined = Vec::with_capacity(g.num_actions());
    let mut best_policy = Vec::with_capacity(g.num_actions());
    for a in 0..g.num_actions() {
        let k = argmax(per_policy.iter().map(|row| row[a].mean_return)).unwrap_or(0);
        best_policy.push(k);
        combined.push(g.reward(state, a) + g.discount() * per_policy[k][a].mean_return);
    }
    let action = argmax(combined.iter().copied()).ok_or(Error::Empty("action set"))?;
    Ok(ParallelRolloutDecision {
        action,
        per_policy,
        combined,
        best_policy,
    })
}
