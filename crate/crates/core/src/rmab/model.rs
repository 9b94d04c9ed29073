use crate::error::{Error, Result};
use crate::mdp::MdpModel;
use crate::stream::StreamRng;

/// Per-arm state indices, one flat index per arm.
pub type JointState = Vec<usize>;

/// Per-arm activity levels.
pub type JointAction = Vec<usize>;

/// One arm: an MDP whose actions `0..M` are activity levels.
#[derive(Debug, Clone)]
pub struct ArmModel {
    pub label: String,
    model: MdpModel,
}

impl ArmModel {
    pub fn new(label: impl Into<String>, model: MdpModel) -> Self {
        Self {
            label: label.into(),
            model,
        }
    }

    pub fn model(&self) -> &MdpModel {
        &self.model
    }

    pub fn num_states(&self) -> usize {
        self.model.num_states()
    }

    /// Number of activity levels `M`.
    pub fn levels(&self) -> usize {
        self.model.num_actions()
    }

    pub fn reward(&self, state: usize, level: usize) -> f64 {
        self.model.reward(state, level)
    }
}

/// `N` independent arms sharing a discount, coupled by `sum_i a_i <= K`.
#[derive(Debug, Clone)]
pub struct RmabModel {
    arms: Vec<ArmModel>,
    budget: usize,
    discount: f64,
}

impl RmabModel {
    pub fn new(arms: Vec<ArmModel>, budget: usize) -> Result<Self> {
        let first = arms.first().ok_or(Error::Empty("arm list"))?;
        if budget == 0 {
            return Err(Error::param("budget", "must be at least 1"));
        }
        let discount = first.model.discount();
        for arm in &arms {
            if arm.model.discount() != discount {
                return Err(Error::param(
                    "discount",
                    format!(
                        "arm `{}` has discount {} but arm `{}` has {}",
                        arm.label,
                        arm.model.discount(),
                        first.label,
                        discount
                    ),
                ));
            }
        }
        Ok(Self {
            arms,
            budget,
            discount,
        })
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn arm(&self, i: usize) -> &ArmModel {
        &self.arms[i]
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Copy with every arm's discount replaced.
    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        let arms = self
            .arms
            .iter()
            .map(|a| Ok(ArmModel::new(a.label.clone(), a.model.with_discount(discount)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms, self.budget)
    }

    /// Product of per-arm state counts.
    pub fn joint_state_count(&self) -> u128 {
        self.arms.iter().map(|a| a.num_states() as u128).product()
    }

    /// Product of per-arm level counts, the unconstrained action count.
    pub fn joint_action_count(&self) -> u128 {
        self.arms.iter().map(|a| a.levels() as u128).product()
    }

    /// Bound on `|sum_i r_i|`.
    pub fn reward_bound(&self) -> f64 {
        self.arms.iter().map(|a| a.model.reward_bound()).sum()
    }

    pub fn check_state(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.arms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.arms.len(),
                got: x.len(),
            });
        }
        for (i, (&s, arm)) in x.iter().zip(&self.arms).enumerate() {
            if s >= arm.num_states() {
                return Err(Error::StateSpace(format!(
                    "arm {i} state {s} out of range 0..{}",
                    arm.num_states()
                )));
            }
        }
        Ok(())
    }

    /// Budget and level check; `step` is reported in the error.
    pub fn check_action(&self, step: usize, a: &[usize]) -> Result<()> {
        let fail = |reason: String| Error::InfeasibleAction {
            step,
            action: a.to_vec(),
            reason,
        };
        if a.len() != self.arms.len() {
            return Err(fail(format!("expected {} levels", self.arms.len())));
        }
        for (i, (&l, arm)) in a.iter().zip(&self.arms).enumerate() {
            if l >= arm.levels() {
                return Err(fail(format!("arm {i} level {l} >= {}", arm.levels())));
            }
        }
        let total: usize = a.iter().sum();
        if total > self.budget {
            return Err(fail(format!("total activity {total} exceeds budget {}", self.budget)));
        }
        Ok(())
    }

    pub fn is_feasible(&self, a: &[usize]) -> bool {
        self.check_action(0, a).is_ok()
    }

    /// `sum_i r_i(x_i, a_i)`.
    pub fn joint_reward(&self, x: &[usize], a: &[usize]) -> f64 {
        self.arms
            .iter()
            .zip(x.iter().zip(a))
            .map(|(arm, (&s, &l))| arm.reward(s, l))
            .sum()
    }

    /// Steps every arm independently, in arm order, one uniform per arm.
    pub fn step(&self, x: &[usize], a: &[usize], rng: &mut StreamRng) -> JointState {
        self.arms
            .iter()
            .zip(x.iter().zip(a))
            .map(|(arm, (&s, &l))| arm.model.sample_next(s, l, rng))
            .collect()
    }

    pub(crate) fn step_into(&self, x: &mut [usize], a: &[usize], rng: &mut StreamRng) {
        for (arm, (s, &l)) in self.arms.iter().zip(x.iter_mut().zip(a)) {
            *s = arm.model.sample_next(*s, l, rng);
        }
    }
}
