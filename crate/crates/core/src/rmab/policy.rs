use super::actions::{lookahead_action, myopic_action};
use super::model::{JointAction, RmabModel};
use crate::error::Result;
use crate::stream::StreamRng;

/// A decision rule for the joint bandit.
pub trait JointPolicy: Sync {
    fn decide(&self, m: &RmabModel, x: &[usize], step: usize, rng: &mut StreamRng) -> Result<JointAction>;
}

impl<P: JointPolicy + ?Sized> JointPolicy for &P {
    fn decide(&self, m: &RmabModel, x: &[usize], step: usize, rng: &mut StreamRng) -> Result<JointAction> {
        (**self).decide(m, x, step, rng)
    }
}

impl<P: JointPolicy + ?Sized> JointPolicy for Box<P> {
    fn decide(&self, m: &RmabModel, x: &[usize], step: usize, rng: &mut StreamRng) -> Result<JointAction> {
        (**self).decide(m, x, step, rng)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MyopicPolicy;

impl JointPolicy for MyopicPolicy {
    fn decide(&self, m: &RmabModel, x: &[usize], _step: usize, _rng: &mut StreamRng) -> Result<JointAction> {
        myopic_action(m, x)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LookaheadPolicy;

impl JointPolicy for LookaheadPolicy {
    fn decide(&self, m: &RmabModel, x: &[usize], _step: usize, _rng: &mut StreamRng) -> Result<JointAction> {
        lookahead_action(m, x)
    }
}
