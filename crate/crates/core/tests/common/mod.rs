//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rmab_rollout::mdp::{DeterministicPolicy, MdpModel};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// `V_pi` from `(I - beta P_pi) V = r_pi`.
pub fn policy_value(m: &MdpModel, p: &[usize]) -> Vec<f64> {
    let n = m.num_states();
    let beta = m.discount();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for s in 0..n {
        a[s][s] += 1.0;
        for y in 0..n {
            a[s][y] -= beta * m.prob(s, p[s], y);
        }
        b[s] = m.reward(s, p[s]);
    }
    solve_linear(a, b)
}

/// Optimal values by enumerating every deterministic policy.
pub fn brute_force_optimum(m: &MdpModel) -> (Vec<f64>, DeterministicPolicy) {
    let n = m.num_states();
    let k = m.num_actions();
    let mut best: Option<(Vec<f64>, Vec<usize>)> = None;
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let p: Vec<usize> = (0..n)
            .map(|_| {
                let a = c % k;
                c /= k;
                a
            })
            .collect();
        let v = policy_value(m, &p);
        let better = match &best {
            None => true,
            Some((bv, _)) => v.iter().sum::<f64>() > bv.iter().sum::<f64>() + 1e-12,
        };
        if better {
            best = Some((v, p));
        }
    }
    let (v, p) = best.unwrap();
    (v, DeterministicPolicy::new(p))
}

/// `max_a { r + beta P v }` with a plain double loop over a dense view.
pub fn backup_by_hand(m: &MdpModel, v: &[f64]) -> Vec<f64> {
    let n = m.num_states();
    (0..n)
        .map(|s| {
            let mut best = f64::NEG_INFINITY;
            for a in 0..m.num_actions() {
                let mut q = m.reward(s, a);
                for (y, vy) in v.iter().enumerate() {
                    q += m.discount() * m.prob(s, a, y) * vy;
                }
                best = best.max(q);
            }
            best
        })
        .collect()
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
