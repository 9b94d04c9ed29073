//! Finite MDPs: state encoding, tabular models, exact solvers and the
//! generative sampling interface.

mod generative;
mod model;
mod solve;
mod space;

pub use generative::{make_tabular_generative, FnPolicy, GenerativeModel, Policy, TabularGenerative};
pub use model::{MdpModel, ROW_SUM_TOLERANCE};
pub use solve::{
    bellman_backup, bellman_backup_policy, finite_horizon_value, greedy_policy, policy_evaluation,
    policy_iteration, policy_iteration_from, value_iteration, DeterministicPolicy,
    PolicyIterationResult, ValueFunction, ValueIterationResult, MAX_EVALUATION_SWEEPS,
    MAX_POLICY_ROUNDS,
};
pub(crate) use solve::sup_distance;
pub use space::StateSpace;
