use super::actions::{advance, enumerate_feasible_actions, JOINT_STATE_LIMIT};
use super::model::{JointAction, RmabModel};
use super::policy::JointPolicy;
use crate::error::{Error, Result};
use crate::mdp::{value_iteration, DeterministicPolicy, MdpModel, StateSpace, ValueFunction};
use crate::stream::StreamRng;

/// Cap on stored transition entries of the product model.
pub const JOINT_ENTRY_LIMIT: u128 = 50_000_000;

/// Product MDP over joint states, with actions indexed into the returned
/// feasible-action list. Joint states are encoded row-major with arm 0
/// most significant.
#[derive(Debug, Clone)]
pub struct JointMdp {
    pub mdp: MdpModel,
    pub actions: Vec<JointAction>,
}

impl JointMdp {
    pub fn encode(&self, x: &[usize]) -> Result<usize> {
        self.mdp.space().encode(x)
    }

    pub fn decode(&self, s: usize) -> Result<Vec<usize>> {
        self.mdp.space().decode(s)
    }
}

pub fn joint_as_mdp(m: &RmabModel) -> Result<JointMdp> {
    let joint = m.joint_state_count();
    if joint > JOINT_STATE_LIMIT {
        return Err(Error::Guard {
            what: "joint state count",
            size: joint,
            limit: JOINT_STATE_LIMIT,
        });
    }
    let actions = enumerate_feasible_actions(m)?;
    let space = StateSpace::new(m.arms().iter().map(|a| a.num_states()).collect())?;
    let n = space.total_states();

    let mut entries: u128 = 0;
    for s in 0..n {
        let x = space.decode(s)?;
        for a in &actions {
            entries += (0..m.num_arms())
                .map(|i| m.arm(i).model().row(x[i], a[i]).len() as u128)
                .product::<u128>();
        }
        if entries > JOINT_ENTRY_LIMIT {
            return Err(Error::Guard {
                what: "joint transition entries",
                size: entries,
                limit: JOINT_ENTRY_LIMIT,
            });
        }
    }

    let mut rows = Vec::with_capacity(n * actions.len());
    let mut rewards = Vec::with_capacity(n * actions.len());
    for s in 0..n {
        let x = space.decode(s)?;
        for a in &actions {
            let arm_rows: Vec<&[(usize, f64)]> = (0..m.num_arms())
                .map(|i| m.arm(i).model().row(x[i], a[i]))
                .collect();
            let mut idx = vec![0; arm_rows.len()];
            let mut row = Vec::new();
            loop {
                let mut y = 0usize;
                let mut p = 1.0;
                for (i, r) in arm_rows.iter().enumerate() {
                    let (s_i, q) = r[idx[i]];
                    y = y * m.arm(i).num_states() + s_i;
                    p *= q;
                }
                row.push((y, p));
                if !advance(&mut idx, &arm_rows) {
                    break;
                }
            }
            rows.push(row);
            rewards.push(m.joint_reward(&x, a));
        }
    }
    let mdp = MdpModel::from_sparse(space, actions.len(), rows, rewards, m.discount())?;
    Ok(JointMdp { mdp, actions })
}

/// Optimal stationary joint policy from value iteration on the product model.
#[derive(Debug, Clone)]
pub struct OptimalJointPolicy {
    pub joint: JointMdp,
    pub policy: DeterministicPolicy,
    pub values: ValueFunction,
}

impl OptimalJointPolicy {
    pub fn solve(m: &RmabModel, tol: f64, max_iters: usize) -> Result<Self> {
        let joint = joint_as_mdp(m)?;
        let res = value_iteration(&joint.mdp, tol, max_iters)?;
        Ok(Self {
            joint,
            policy: res.policy,
            values: res.values,
        })
    }

    /// Optimal value at joint state `x`.
    pub fn value(&self, x: &[usize]) -> Result<f64> {
        Ok(self.values[self.joint.encode(x)?])
    }
}

impl JointPolicy for OptimalJointPolicy {
    fn decide(&self, _m: &RmabModel, x: &[usize], _step: usize, _rng: &mut StreamRng) -> Result<JointAction> {
        let s = self.joint.encode(x)?;
        Ok(self.joint.actions[self.policy[s]].clone())
    }
}
