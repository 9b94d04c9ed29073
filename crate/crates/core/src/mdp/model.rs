use rand::Rng;

use super::space::StateSpace;
use crate::error::{Error, Result};
use crate::stream::StreamRng;

/// Row-sum tolerance accepted at construction; rows are renormalized after.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Finite discounted MDP with sparse transition rows.
///
/// Rows and rewards are indexed by `state * num_actions + action`.
#[derive(Debug, Clone)]
pub struct MdpModel {
    space: StateSpace,
    num_actions: usize,
    rows: Vec<Vec<(usize, f64)>>,
    cdfs: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    discount: f64,
    r_min: f64,
    r_max: f64,
}

fn check_discount(discount: f64) -> Result<()> {
    if !(0.0..1.0).contains(&discount) {
        return Err(Error::InvalidDiscount(discount));
    }
    Ok(())
}

impl MdpModel {
    /// Builds a model from dense tables: `transitions[s][a][y]`, `rewards[s][a]`.
    pub fn from_dense(
        space: StateSpace,
        num_actions: usize,
        transitions: &[Vec<Vec<f64>>],
        rewards: &[Vec<f64>],
        discount: f64,
    ) -> Result<Self> {
        let n = space.total_states();
        if transitions.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: transitions.len(),
            });
        }
        if rewards.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rewards.len(),
            });
        }
        let mut rows = Vec::with_capacity(n * num_actions);
        let mut flat_rewards = Vec::with_capacity(n * num_actions);
        for s in 0..n {
            if transitions[s].len() != num_actions {
                return Err(Error::DimensionMismatch {
                    expected: num_actions,
                    got: transitions[s].len(),
                });
            }
            if rewards[s].len() != num_actions {
                return Err(Error::DimensionMismatch {
                    expected: num_actions,
                    got: rewards[s].len(),
                });
            }
            for a in 0..num_actions {
                let dense = &transitions[s][a];
                if dense.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: dense.len(),
                    });
                }
                rows.push(dense.iter().copied().enumerate().collect());
                flat_rewards.push(rewards[s][a]);
            }
        }
        Self::from_sparse(space, num_actions, rows, flat_rewards, discount)
    }

    /// Builds a model from sparse rows indexed by `s * num_actions + a`.
    /// Duplicate targets within a row are merged and zero entries dropped.
    pub fn from_sparse(
        space: StateSpace,
        num_actions: usize,
        rows: Vec<Vec<(usize, f64)>>,
        rewards: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        check_discount(discount)?;
        if num_actions == 0 {
            return Err(Error::param("num_actions", "must be positive"));
        }
        let n = space.total_states();
        let expected = n
            .checked_mul(num_actions)
            .ok_or_else(|| Error::StateSpace("state-action count overflows".into()))?;
        if rows.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: rows.len(),
            });
        }
        if rewards.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: rewards.len(),
            });
        }

        let mut clean_rows = Vec::with_capacity(expected);
        for (idx, row) in rows.into_iter().enumerate() {
            let (state, action) = (idx / num_actions, idx % num_actions);
            let mut row = row;
            for &(next, p) in &row {
                if next >= n {
                    return Err(Error::StateSpace(format!(
                        "transition target {next} out of range at state {state}, action {action}"
                    )));
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidProbability {
                        state,
                        action,
                        next,
                        value: p,
                    });
                }
            }
            row.sort_by_key(|&(y, _)| y);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (y, p) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == y => last.1 += p,
                    _ => merged.push((y, p)),
                }
            }
            merged.retain(|&(_, p)| p > 0.0);
            let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum { state, action, sum });
            }
            for entry in &mut merged {
                entry.1 /= sum;
            }
            clean_rows.push(merged);
        }

        for (idx, r) in rewards.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::InvalidReward {
                    state: idx / num_actions,
                    action: idx % num_actions,
                });
            }
        }
        let r_min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        let r_max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let cdfs = clean_rows.iter().map(|row| cumulative(row)).collect();
        Ok(Self {
            space,
            num_actions,
            rows: clean_rows,
            cdfs,
            rewards,
            discount,
            r_min,
            r_max,
        })
    }

    /// Same dynamics, different reward table.
    pub fn with_rewards(&self, rewards: Vec<f64>) -> Result<Self> {
        if rewards.len() != self.rewards.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rewards.len(),
                got: rewards.len(),
            });
        }
        for (idx, r) in rewards.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::InvalidReward {
                    state: idx / self.num_actions,
                    action: idx % self.num_actions,
                });
            }
        }
        let r_min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        let r_max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            rewards,
            r_min,
            r_max,
            ..self.clone()
        })
    }

    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        check_discount(discount)?;
        Ok(Self {
            discount,
            ..self.clone()
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn num_states(&self) -> usize {
        self.space.total_states()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    #[inline]
    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.rewards[state * self.num_actions + action]
    }

    /// Flat reward table indexed by `s * num_actions + a`.
    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    #[inline]
    pub fn row(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.rows[state * self.num_actions + action]
    }

    /// Probability of `next` under `(state, action)`.
    pub fn prob(&self, state: usize, action: usize, next: usize) -> f64 {
        let row = self.row(state, action);
        match row.binary_search_by_key(&next, |&(y, _)| y) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn reward_min(&self) -> f64 {
        self.r_min
    }

    pub fn reward_max(&self) -> f64 {
        self.r_max
    }

    /// Largest absolute reward, the `R_max` of the value bounds.
    pub fn reward_bound(&self) -> f64 {
        self.r_min.abs().max(self.r_max.abs())
    }

    /// `sum_y P(y | s, a) v(y)`.
    #[inline]
    pub fn expected(&self, state: usize, action: usize, v: &[f64]) -> f64 {
        self.row(state, action).iter().map(|&(y, p)| p * v[y]).sum()
    }

    /// One-step action value `r(s,a) + beta * E[v(y)]`.
    #[inline]
    pub fn q_value(&self, state: usize, action: usize, v: &[f64]) -> f64 {
        self.reward(state, action) + self.discount * self.expected(state, action, v)
    }

    pub fn check_action(&self, state: usize, action: usize) -> Result<()> {
        if action >= self.num_actions || state >= self.num_states() {
            return Err(Error::InvalidAction {
                state,
                action,
                num_actions: self.num_actions,
            });
        }
        Ok(())
    }

    /// Draws a successor of `(state, action)`, consuming one uniform from `rng`.
    #[inline]
    pub fn sample_next(&self, state: usize, action: usize, rng: &mut StreamRng) -> usize {
        let idx = state * self.num_actions + action;
        let cdf = &self.cdfs[idx];
        let u: f64 = rng.gen();
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        self.rows[idx][k].0
    }
}

fn cumulative(row: &[(usize, f64)]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = row
        .iter()
        .map(|&(_, p)| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}
