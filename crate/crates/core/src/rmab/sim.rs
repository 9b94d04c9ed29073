use rand::Rng;
use rayon::prelude::*;

use super::model::RmabModel;
use super::policy::JointPolicy;
use crate::error::{Error, Result};
use crate::stream::{derive_stream, StreamRng};

/// Discounted reward `sum_{t<horizon} beta^t sum_i r_i` of one episode from `x0`.
///
/// Arm transitions and policy randomness use two separate streams split
/// off `rng`, so policies compared on the same stream see the same
/// transition noise.
pub fn simulate_episode<P: JointPolicy + ?Sized>(
    m: &RmabModel,
    policy: &P,
    x0: &[usize],
    horizon: usize,
    rng: &mut StreamRng,
) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::param("horizon", "must be at least 1"));
    }
    m.check_state(x0)?;
    let root: u64 = rng.gen();
    let mut dynamics = derive_stream(root, &[0]);
    let mut decisions = derive_stream(root, &[1]);
    let beta = m.discount();
    let mut x = x0.to_vec();
    let mut total = 0.0;
    let mut weight = 1.0;
    for t in 0..horizon {
        let a = policy.decide(m, &x, t, &mut decisions)?;
        m.check_action(t, &a)?;
        total += weight * m.joint_reward(&x, &a);
        weight *= beta;
        m.step_into(&mut x, &a, &mut dynamics);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEvaluation {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(episodes)`; 0 for one episode.
    pub std_err: f64,
    pub episodes: usize,
}

/// Mean and standard error of [`simulate_episode`] over `episodes`
/// episodes; episode `e` uses the stream derived from `(seed, e)`.
pub fn evaluate_policy<P: JointPolicy + ?Sized>(
    m: &RmabModel,
    policy: &P,
    x0: &[usize],
    episodes: usize,
    horizon: usize,
    seed: u64,
) -> Result<PolicyEvaluation> {
    if episodes == 0 {
        return Err(Error::param("episodes", "must be at least 1"));
    }
    let returns: Vec<f64> = (0..episodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = derive_stream(seed, &[e as u64]);
            simulate_episode(m, policy, x0, horizon, &mut rng)
        })
        .collect::<Result<_>>()?;
    let n = episodes as f64;
    // identical returns give an exact mean and a zero spread, free of rounding
    let constant = returns.iter().all(|v| *v == returns[0]);
    let mean = if constant { returns[0] } else { returns.iter().sum::<f64>() / n };
    let std_err = if episodes > 1 && !constant {
        let ss: f64 = returns.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(PolicyEvaluation {
        mean,
        std_err,
        episodes,
    })
}
