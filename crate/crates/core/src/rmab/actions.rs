use std::collections::HashMap;

use super::model::{JointAction, RmabModel};
use crate::error::{Error, Result};

/// Cap on `prod_i M_i` for explicit enumeration of feasible actions.
pub const ACTION_ENUMERATION_LIMIT: u128 = 10_000_000;

/// Cap on the joint state count for exact joint computations.
pub const JOINT_STATE_LIMIT: u128 = 1_000_000;

pub(crate) fn near_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// All `a` with `a_i < M_i` and `sum_i a_i <= K`, in lexicographic order.
pub fn enumerate_feasible_actions(m: &RmabModel) -> Result<Vec<JointAction>> {
    let size = m.joint_action_count();
    if size > ACTION_ENUMERATION_LIMIT {
        return Err(Error::Guard {
            what: "joint action product (use a greedy or index policy)",
            size,
            limit: ACTION_ENUMERATION_LIMIT,
        });
    }
    let levels: Vec<usize> = m.arms().iter().map(|a| a.levels()).collect();
    let mut out = Vec::new();
    let mut cur = vec![0; levels.len()];
    fill(&levels, m.budget(), 0, &mut cur, &mut out);
    Ok(out)
}

fn fill(levels: &[usize], left: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<JointAction>) {
    if i == levels.len() {
        out.push(cur.clone());
        return;
    }
    for l in 0..levels[i].min(left + 1) {
        cur[i] = l;
        fill(levels, left - l, i + 1, cur, out);
    }
    cur[i] = 0;
}

/// Knapsack table: `best[i][b]` is the largest reward of arms `i..N`
/// using at most `b` units.
fn knapsack(m: &RmabModel, x: &[usize]) -> (Vec<Vec<f64>>, usize) {
    let n = m.num_arms();
    let cap: usize = m
        .arms()
        .iter()
        .map(|a| a.levels() - 1)
        .sum::<usize>()
        .min(m.budget());
    let mut best = vec![vec![0.0; cap + 1]; n + 1];
    for i in (0..n).rev() {
        let arm = m.arm(i);
        for b in 0..=cap {
            let mut v = f64::NEG_INFINITY;
            for l in 0..arm.levels().min(b + 1) {
                v = v.max(arm.reward(x[i], l) + best[i + 1][b - l]);
            }
            best[i][b] = v;
        }
    }
    (best, cap)
}

/// Maximum of `sum_i r_i(x_i, a_i)` over feasible `a`.
pub fn myopic_value(m: &RmabModel, x: &[usize]) -> Result<f64> {
    m.check_state(x)?;
    let (best, cap) = knapsack(m, x);
    Ok(best[0][cap])
}

/// Feasible action maximizing the immediate joint reward; among
/// maximizers the lexicographically smallest.
pub fn myopic_action(m: &RmabModel, x: &[usize]) -> Result<JointAction> {
    m.check_state(x)?;
    let (best, mut b) = knapsack(m, x);
    let mut a = Vec::with_capacity(m.num_arms());
    for i in 0..m.num_arms() {
        let arm = m.arm(i);
        let target = best[i][b];
        let l = (0..arm.levels().min(b + 1))
            .find(|&l| near_tie(arm.reward(x[i], l) + best[i + 1][b - l], target))
            .unwrap_or(0);
        a.push(l);
        b -= l;
    }
    Ok(a)
}

/// One-step lookahead: maximizes
/// `sum_i r_i(x_i, a_i) + beta * E[max_a' sum_i r_i(Y_i, a'_i)]`.
pub fn lookahead_action(m: &RmabModel, x: &[usize]) -> Result<JointAction> {
    m.check_state(x)?;
    let joint = m.joint_state_count();
    if joint > JOINT_STATE_LIMIT {
        return Err(Error::Guard {
            what: "joint state count for lookahead",
            size: joint,
            limit: JOINT_STATE_LIMIT,
        });
    }
    let actions = enumerate_feasible_actions(m)?;
    let beta = m.discount();
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut best: Option<(usize, f64)> = None;
    for (k, a) in actions.iter().enumerate() {
        let mut future = 0.0;
        if beta > 0.0 {
            let rows: Vec<&[(usize, f64)]> = (0..m.num_arms())
                .map(|i| m.arm(i).model().row(x[i], a[i]))
                .collect();
            let mut y = vec![0; m.num_arms()];
            let mut idx = vec![0; m.num_arms()];
            loop {
                let mut p = 1.0;
                for i in 0..rows.len() {
                    let (s, q) = rows[i][idx[i]];
                    y[i] = s;
                    p *= q;
                }
                let v = match cache.get(&y) {
                    Some(&v) => v,
                    None => {
                        let v = myopic_value(m, &y)?;
                        cache.insert(y.clone(), v);
                        v
                    }
                };
                future += p * v;
                if !advance(&mut idx, &rows) {
                    break;
                }
            }
        }
        let q = m.joint_reward(x, a) + beta * future;
        if best.map_or(true, |(_, b)| q > b && !near_tie(q, b)) {
            best = Some((k, q));
        }
    }
    let (k, _) = best.ok_or(Error::Empty("feasible action set"))?;
    Ok(actions[k].clone())
}

/// Odometer over the supports of `rows`; false once every combination was visited.
pub(crate) fn advance(idx: &mut [usize], rows: &[&[(usize, f64)]]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < rows[i].len() {
            return true;
        }
        idx[i] = 0;
    }
    false
}
