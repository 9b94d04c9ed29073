//! Small model families used by the bundled scenarios and the test suites.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{MdpModel, StateSpace};
use crate::rmab::{ArmModel, RmabModel};
use crate::stream::derive_stream;

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|s| {
            let mut row = vec![0.0; n];
            row[s] = 1.0;
            row
        })
        .collect()
}

/// Dense random MDP: rows are normalized uniforms, rewards uniform in `[0, 1)`.
pub fn random_mdp(num_states: usize, num_actions: usize, discount: f64, seed: u64) -> Result<MdpModel> {
    let mut rng = derive_stream(seed, &[num_states as u64, num_actions as u64]);
    let mut transitions = Vec::with_capacity(num_states);
    let mut rewards = Vec::with_capacity(num_states);
    for _ in 0..num_states {
        let mut per_action = Vec::with_capacity(num_actions);
        let mut r = Vec::with_capacity(num_actions);
        for _ in 0..num_actions {
            let raw: Vec<f64> = (0..num_states).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            per_action.push(raw.into_iter().map(|p| p / sum).collect());
            r.push(rng.gen::<f64>());
        }
        transitions.push(per_action);
        rewards.push(r);
    }
    MdpModel::from_dense(
        StateSpace::flat(num_states)?,
        num_actions,
        &transitions,
        &rewards,
        discount,
    )
}

/// Arm whose every level is a self-loop, with `rewards[x][a]`.
pub fn static_arm(rewards: &[Vec<f64>], discount: f64) -> Result<MdpModel> {
    let n = rewards.len();
    let levels = rewards.first().map_or(0, Vec::len);
    let rows = identity_rows(n);
    let transitions: Vec<Vec<Vec<f64>>> = rows.iter().map(|r| vec![r.clone(); levels]).collect();
    MdpModel::from_dense(StateSpace::flat(n)?, levels, &transitions, rewards, discount)
}

/// Two-action arm with the same transition matrix under both actions;
/// `r(x, 0) = passive[x]`, `r(x, 1) = active[x]`.
pub fn action_independent_arm(
    transition: &[Vec<f64>],
    passive: &[f64],
    active: &[f64],
    discount: f64,
) -> Result<MdpModel> {
    let n = transition.len();
    if passive.len() != n || active.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: passive.len().min(active.len()),
        });
    }
    let transitions: Vec<Vec<Vec<f64>>> = transition.iter().map(|r| vec![r.clone(), r.clone()]).collect();
    let rewards: Vec<Vec<f64>> = (0..n).map(|s| vec![passive[s], active[s]]).collect();
    MdpModel::from_dense(StateSpace::flat(n)?, 2, &transitions, &rewards, discount)
}

/// Restart arm on `0..n`: playing collects `active[x]` and resets to 0;
/// resting earns nothing and drifts up one state with probability `drift`.
pub fn restart_arm(active: &[f64], drift: f64, discount: f64) -> Result<MdpModel> {
    let n = active.len();
    if !(0.0..=1.0).contains(&drift) {
        return Err(Error::param("drift", format!("must lie in [0, 1], got {drift}")));
    }
    let mut transitions = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    for (x, &r) in active.iter().enumerate() {
        let mut passive = vec![0.0; n];
        let up = (x + 1).min(n - 1);
        passive[up] += drift;
        passive[x] += 1.0 - drift;
        let mut reset = vec![0.0; n];
        reset[0] = 1.0;
        transitions.push(vec![passive, reset]);
        rewards.push(vec![0.0, r]);
    }
    MdpModel::from_dense(StateSpace::flat(n)?, 2, &transitions, &rewards, discount)
}

/// Self-loop arm with `M` levels and `r(x, a) = a * gain[x]`.
pub fn static_linear_levels(gain: &[f64], levels: usize, discount: f64) -> Result<MdpModel> {
    let rewards: Vec<Vec<f64>> = gain
        .iter()
        .map(|g| (0..levels).map(|a| a as f64 * g).collect())
        .collect();
    static_arm(&rewards, discount)
}

/// Self-loop arm with `M` levels and `r(x, a) = gain[x] * sqrt(a)`.
pub fn static_concave_levels(gain: &[f64], levels: usize, discount: f64) -> Result<MdpModel> {
    let rewards: Vec<Vec<f64>> = gain
        .iter()
        .map(|g| (0..levels).map(|a| g * (a as f64).sqrt()).collect())
        .collect();
    static_arm(&rewards, discount)
}

/// `arms` random arms, each an independent [`random_mdp`].
pub fn random_rmab(
    arms: usize,
    states: usize,
    levels: usize,
    budget: usize,
    discount: f64,
    seed: u64,
) -> Result<RmabModel> {
    let arms = (0..arms)
        .map(|i| {
            let m = random_mdp(states, levels, discount, crate::stream::derive_seed(seed, &[i as u64]))?;
            Ok(ArmModel::new(format!("arm{i}"), m))
        })
        .collect::<Result<Vec<_>>>()?;
    RmabModel::new(arms, budget)
}
