use super::model::MdpModel;
use super::solve::DeterministicPolicy;
use crate::error::{Error, Result};
use crate::stream::StreamRng;

/// Simulator access to an MDP: rewards and next-state draws.
///
/// Implementations must be pure functions of `(state, action)` and the
/// stream state, so two calls with equal streams return equal samples.
pub trait GenerativeModel: Sync {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn discount(&self) -> f64;
    /// `(R_min, R_max)` over all state-action pairs.
    fn reward_bounds(&self) -> (f64, f64);
    fn reward(&self, state: usize, action: usize) -> f64;
    fn sample_next(&self, state: usize, action: usize, rng: &mut StreamRng) -> usize;

    /// Next state and immediate reward.
    fn sample(&self, state: usize, action: usize, rng: &mut StreamRng) -> (usize, f64) {
        let r = self.reward(state, action);
        (self.sample_next(state, action, rng), r)
    }

    fn check_action(&self, state: usize, action: usize) -> Result<()> {
        if state >= self.num_states() || action >= self.num_actions() {
            return Err(Error::InvalidAction {
                state,
                action,
                num_actions: self.num_actions(),
            });
        }
        Ok(())
    }
}

impl GenerativeModel for MdpModel {
    fn num_states(&self) -> usize {
        MdpModel::num_states(self)
    }

    fn num_actions(&self) -> usize {
        MdpModel::num_actions(self)
    }

    fn discount(&self) -> f64 {
        MdpModel::discount(self)
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (self.reward_min(), self.reward_max())
    }

    fn reward(&self, state: usize, action: usize) -> f64 {
        MdpModel::reward(self, state, action)
    }

    fn sample_next(&self, state: usize, action: usize, rng: &mut StreamRng) -> usize {
        MdpModel::sample_next(self, state, action, rng)
    }
}

/// Generative view of a tabular model.
#[derive(Debug, Clone, Copy)]
pub struct TabularGenerative<'a> {
    model: &'a MdpModel,
}

impl<'a> TabularGenerative<'a> {
    pub fn model(&self) -> &'a MdpModel {
        self.model
    }
}

pub fn make_tabular_generative(m: &MdpModel) -> TabularGenerative<'_> {
    TabularGenerative { model: m }
}

impl GenerativeModel for TabularGenerative<'_> {
    fn num_states(&self) -> usize {
        self.model.num_states()
    }

    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn discount(&self) -> f64 {
        self.model.discount()
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (self.model.reward_min(), self.model.reward_max())
    }

    fn reward(&self, state: usize, action: usize) -> f64 {
        self.model.reward(state, action)
    }

    fn sample_next(&self, state: usize, action: usize, rng: &mut StreamRng) -> usize {
        self.model.sample_next(state, action, rng)
    }
}

/// A (possibly randomized, possibly nonstationary) decision rule over flat states.
pub trait Policy: Sync {
    fn act(&self, state: usize, step: usize, rng: &mut StreamRng) -> usize;
}

impl Policy for DeterministicPolicy {
    fn act(&self, state: usize, _step: usize, _rng: &mut StreamRng) -> usize {
        self[state]
    }
}

impl<P: Policy + ?Sized> Policy for &P {
    fn act(&self, state: usize, step: usize, rng: &mut StreamRng) -> usize {
        (**self).act(state, step, rng)
    }
}

/// Adapts a closure `(state, step, rng) -> action` into a [`Policy`].
pub struct FnPolicy<F>(pub F);

impl<F> Policy for FnPolicy<F>
where
    F: Fn(usize, usize, &mut StreamRng) -> usize + Sync,
{
    fn act(&self, state: usize, step: usize, rng: &mut StreamRng) -> usize {
        (self.0)(state, step, rng)
    }
}
