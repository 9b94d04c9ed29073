//! Exact dynamic programming: Bellman operators, value iteration, policy
//! evaluation and policy iteration.
//!
//! Discounting starts at `beta^0`: the first reward is undiscounted, both
//! for infinite-horizon values and for `finite_horizon_value`.

use std::ops::Deref;

use super::model::MdpModel;
use crate::error::{Error, Result};

/// Sweep cap for iterative policy evaluation.
pub const MAX_EVALUATION_SWEEPS: usize = 1_000_000;

/// Round cap for policy iteration.
pub const MAX_POLICY_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction(Vec<f64>);

impl ValueFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `max_x |self(x) - other(x)|`.
    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        sup_distance(&self.0, &other.0)
    }
}

impl Deref for ValueFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Stationary deterministic policy: one action per flat state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy(Vec<usize>);

impl DeterministicPolicy {
    pub fn new(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    pub fn constant(num_states: usize, action: usize) -> Self {
        Self(vec![action; num_states])
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, m: &MdpModel) -> Result<()> {
        if self.0.len() != m.num_states() {
            return Err(Error::DimensionMismatch {
                expected: m.num_states(),
                got: self.0.len(),
            });
        }
        for (s, &a) in self.0.iter().enumerate() {
            m.check_action(s, a)?;
        }
        Ok(())
    }
}

impl Deref for DeterministicPolicy {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_size(v: &[f64], m: &MdpModel) -> Result<()> {
    if v.len() != m.num_states() {
        return Err(Error::DimensionMismatch {
            expected: m.num_states(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::param("tol", format!("must be positive and finite, got {tol}")));
    }
    Ok(())
}

/// Best action and its value at `state`; ties go to the lowest action index.
#[inline]
pub(crate) fn best_action(m: &MdpModel, state: usize, v: &[f64]) -> (usize, f64) {
    let mut best = (0, m.q_value(state, 0, v));
    for a in 1..m.num_actions() {
        let q = m.q_value(state, a, v);
        if q > best.1 {
            best = (a, q);
        }
    }
    best
}

/// `(TV)(x) = max_a { r(x,a) + beta * sum_y P(y|x,a) V(y) }`.
pub fn bellman_backup(v: &ValueFunction, m: &MdpModel) -> Result<ValueFunction> {
    check_size(v, m)?;
    Ok(ValueFunction(
        (0..m.num_states()).map(|s| best_action(m, s, v).1).collect(),
    ))
}

/// `(T_pi V)(x) = r(x, pi(x)) + beta * sum_y P(y|x,pi(x)) V(y)`.
pub fn bellman_backup_policy(
    v: &ValueFunction,
    m: &MdpModel,
    p: &DeterministicPolicy,
) -> Result<ValueFunction> {
    check_size(v, m)?;
    p.validate(m)?;
    Ok(ValueFunction(
        (0..m.num_states()).map(|s| m.q_value(s, p[s], v)).collect(),
    ))
}

/// Greedy policy for `v`, lowest action index on ties.
pub fn greedy_policy(v: &ValueFunction, m: &MdpModel) -> Result<DeterministicPolicy> {
    check_size(v, m)?;
    Ok(DeterministicPolicy(
        (0..m.num_states()).map(|s| best_action(m, s, v).0).collect(),
    ))
}

#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    pub values: ValueFunction,
    pub policy: DeterministicPolicy,
    pub iterations: usize,
    /// `||T V_n - V_n||` at the last sweep.
    pub residual: f64,
}

/// Value iteration from `V_0 = 0`.
///
/// Stops at the first `n` with `||T V_n - V_n|| < tol` and returns
/// `T V_n`, which is within `tol * beta / (1 - beta)` of `V*`.
pub fn value_iteration(m: &MdpModel, tol: f64, max_iters: usize) -> Result<ValueIterationResult> {
    check_tol(tol)?;
    let n = m.num_states();
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iters {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = best_action(m, s, &v).1;
        }
        residual = sup_distance(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if residual < tol {
            let values = ValueFunction(v);
            let policy = greedy_policy(&values, m)?;
            return Ok(ValueIterationResult {
                values,
                policy,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
        residual,
    })
}

fn evaluate_from(
    m: &MdpModel,
    p: &DeterministicPolicy,
    mut v: Vec<f64>,
    tol: f64,
) -> Result<ValueFunction> {
    let mut next = vec![0.0; v.len()];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_EVALUATION_SWEEPS {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = m.q_value(s, p[s], &v);
        }
        residual = sup_distance(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if residual < tol {
            return Ok(ValueFunction(v));
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_EVALUATION_SWEEPS,
        residual,
    })
}

/// Iterates `T_pi` from zero until the sweep residual drops below `tol`.
pub fn policy_evaluation(m: &MdpModel, p: &DeterministicPolicy, tol: f64) -> Result<ValueFunction> {
    check_tol(tol)?;
    p.validate(m)?;
    evaluate_from(m, p, vec![0.0; m.num_states()], tol)
}

#[derive(Debug, Clone)]
pub struct PolicyIterationResult {
    pub policy: DeterministicPolicy,
    pub values: ValueFunction,
    /// Evaluation/improvement rounds performed, including the final one
    /// that left the policy unchanged.
    pub rounds: usize,
    /// Value of the policy evaluated in each round.
    pub history: Vec<ValueFunction>,
    /// Number of states whose action changed in each round.
    pub changes: Vec<usize>,
}

/// Policy iteration from the all-zeros policy.
pub fn policy_iteration(m: &MdpModel, tol: f64) -> Result<PolicyIterationResult> {
    policy_iteration_from(
        m,
        DeterministicPolicy::constant(m.num_states(), 0),
        tol,
        MAX_POLICY_ROUNDS,
    )
}

/// Policy iteration from `initial`.
///
/// Evaluation is iterative and warm-started; an action is only replaced
/// when the challenger beats it by more than a margin tied to the
/// evaluation error, so approximate evaluation cannot cause cycling. The
/// returned values are within `tol` of `V*`.
pub fn policy_iteration_from(
    m: &MdpModel,
    initial: DeterministicPolicy,
    tol: f64,
    max_rounds: usize,
) -> Result<PolicyIterationResult> {
    check_tol(tol)?;
    initial.validate(m)?;
    let beta = m.discount();
    let floor = 1e-13 * (m.reward_bound() / (1.0 - beta)).max(1.0);
    let eval_tol = (tol * (1.0 - beta) * (1.0 - beta) / 8.0).max(floor);
    let margin = (tol * (1.0 - beta) / 4.0).max(4.0 * floor);

    let mut policy = initial;
    let mut v = vec![0.0; m.num_states()];
    let mut history = Vec::new();
    let mut changes = Vec::new();
    for round in 1..=max_rounds {
        let values = evaluate_from(m, &policy, v, eval_tol)?;
        let mut changed = 0;
        let mut next = policy.0.clone();
        for (s, slot) in next.iter_mut().enumerate() {
            let (best, q_best) = best_action(m, s, &values);
            if best != *slot && q_best > m.q_value(s, *slot, &values) + margin {
                *slot = best;
                changed += 1;
            }
        }
        history.push(values.clone());
        changes.push(changed);
        if changed == 0 {
            return Ok(PolicyIterationResult {
                policy,
                values,
                rounds: round,
                history,
                changes,
            });
        }
        policy = DeterministicPolicy(next);
        v = values.0;
    }
    Err(Error::NonConvergence {
        iterations: max_rounds,
        residual: f64::NAN,
    })
}

/// `V_{pi,tau}(x) = E[sum_{t=0}^{tau-1} beta^t r(x_t, pi(x_t)) | x_0 = x]`
/// by exact backward recursion.
pub fn finite_horizon_value(
    m: &MdpModel,
    p: &DeterministicPolicy,
    horizon: usize,
) -> Result<ValueFunction> {
    if horizon == 0 {
        return Err(Error::param("horizon", "must be at least 1"));
    }
    p.validate(m)?;
    let n = m.num_states();
    let mut v: Vec<f64> = (0..n).map(|s| m.reward(s, p[s])).collect();
    let mut next = vec![0.0; n];
    for _ in 1..horizon {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = m.q_value(s, p[s], &v);
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(ValueFunction(v))
}
