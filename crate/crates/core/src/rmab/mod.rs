//! Restless multi-armed bandits: model, feasible actions under the
//! budget, baseline policies, the exact product model and simulation.

mod actions;
mod joint;
mod model;
mod policy;
mod sim;

pub use actions::{
    enumerate_feasible_actions, lookahead_action, myopic_action, myopic_value,
    ACTION_ENUMERATION_LIMIT, JOINT_STATE_LIMIT,
};
pub use joint::{joint_as_mdp, JointMdp, OptimalJointPolicy, JOINT_ENTRY_LIMIT};
pub use model::{ArmModel, JointAction, JointState, RmabModel};
pub use policy::{JointPolicy, LookaheadPolicy, MyopicPolicy};
pub use sim::{evaluate_policy, simulate_episode, PolicyEvaluation};
