//! Closed-form error bounds and sample-size calculators.

use crate::error::{Error, Result};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidDiscount(beta));
    }
    Ok(())
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::param(name, format!("must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

fn check_pos(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::param(name, format!("must be finite and positive, got {v}")));
    }
    Ok(())
}

/// Approximate policy iteration with evaluation error `epsilon` and
/// improvement error `delta`: `(delta + 2 beta epsilon) / (1 - beta^2)`.
pub fn api_worst_case_bound(delta: f64, epsilon: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("delta", delta)?;
    check_nonneg("epsilon", epsilon)?;
    Ok((delta + 2.0 * beta * epsilon) / (1.0 - beta * beta))
}

/// Greedy policy with respect to an `epsilon`-accurate value function:
/// `2 beta epsilon / (1 - beta)`.
pub fn improved_greedy_bound(epsilon: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("epsilon", epsilon)?;
    Ok(2.0 * beta * epsilon / (1.0 - beta))
}

/// As [`improved_greedy_bound`] with rewards known only to within `alpha`:
/// `(2 beta epsilon + 2 alpha) / (1 - beta)`.
pub fn reward_error_bound(epsilon: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("alpha", alpha)?;
    Ok((2.0 * beta * epsilon + 2.0 * alpha) / (1.0 - beta))
}

/// Truncation error of a `tau`-step horizon: `beta^tau R_max / (1 - beta)`.
pub fn rolling_horizon_bound(r_max: f64, beta: f64, tau: u32) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg("r_max", r_max)?;
    Ok(beta.powf(tau as f64) * r_max / (1.0 - beta))
}

/// Truncation plus greedy error:
/// `beta^tau R_max / (1 - beta) + 2 beta epsilon / (1 - beta)`.
pub fn approx_plus_horizon_bound(r_max: f64, beta: f64, tau: u32, epsilon: f64) -> Result<f64> {
    Ok(rolling_horizon_bound(r_max, beta, tau)? + improved_greedy_bound(epsilon, beta)?)
}

/// Smallest integer `tau` with `tau > 1 + log_beta(epsilon (1 - beta) / R_max)`.
///
/// Returns 1 when the one-step truncation error is already at most
/// `epsilon`, i.e. `epsilon >= R_max / (1 - beta)` or `R_max = 0`.
pub fn min_horizon_for_eps(epsilon: f64, beta: f64, r_max: f64) -> Result<u32> {
    check_beta(beta)?;
    check_pos("epsilon", epsilon)?;
    check_nonneg("r_max", r_max)?;
    if r_max == 0.0 || epsilon >= r_max / (1.0 - beta) {
        return Ok(1);
    }
    let threshold = 1.0 + (epsilon * (1.0 - beta) / r_max).ln() / beta.ln();
    let tau = threshold.floor() + 1.0;
    if tau > u32::MAX as f64 {
        return Err(Error::param("epsilon", "required horizon overflows"));
    }
    Ok(tau as u32)
}

fn sample_bound_terms(
    epsilon: f64,
    delta: f64,
    beta: f64,
    tau: u32,
    r_min: f64,
    r_max: f64,
) -> Result<(f64, f64)> {
    check_pos("epsilon", epsilon)?;
    check_pos("delta", delta)?;
    check_beta(beta)?;
    if tau == 0 {
        return Err(Error::param("tau", "must be at least 1"));
    }
    if !(r_min <= r_max) || !r_min.is_finite() || !r_max.is_finite() {
        return Err(Error::param("r_min", format!("need finite r_min <= r_max, got {r_min} > {r_max}")));
    }
    let spread = 2.0 * r_max - r_min;
    let trunc = 1.0 - beta.powf(tau as f64);
    Ok((spread * spread, trunc))
}

/// Trajectory count making a rollout estimate `epsilon`-accurate with
/// probability at least `1 - delta`:
/// `ceil((2R_max - R_min)^2 (1 - beta^tau)^2 ln(2/delta) / (2 epsilon^2 (1 - beta)^2))`,
/// and at least 1.
pub fn hoeffding_sample_bound(
    epsilon: f64,
    delta: f64,
    beta: f64,
    tau: u32,
    r_min: f64,
    r_max: f64,
) -> Result<u64> {
    let (spread2, trunc) = sample_bound_terms(epsilon, delta, beta, tau, r_min, r_max)?;
    let l = spread2 * trunc * trunc * (2.0 / delta).ln()
        / (2.0 * epsilon * epsilon * (1.0 - beta) * (1.0 - beta));
    if !l.is_finite() || l > u64::MAX as f64 {
        return Err(Error::param("epsilon", "sample bound overflows"));
    }
    Ok((l.ceil() as u64).max(1))
}

/// Tail probability matching [`hoeffding_sample_bound`]:
/// `2 exp(-2 epsilon^2 (1 - beta)^2 L / ((2R_max - R_min)^2 (1 - beta^tau)^2))`.
pub fn sample_bound_tail(
    l: u64,
    epsilon: f64,
    beta: f64,
    tau: u32,
    r_min: f64,
    r_max: f64,
) -> Result<f64> {
    let (spread2, trunc) = sample_bound_terms(epsilon, 1.0, beta, tau, r_min, r_max)?;
    let denom = spread2 * trunc * trunc;
    if denom == 0.0 {
        return Ok(0.0);
    }
    let expo = -2.0 * epsilon * epsilon * (1.0 - beta) * (1.0 - beta) * l as f64 / denom;
    Ok(2.0 * expo.exp())
}

/// The closed form sometimes quoted for the same sample size,
/// `2 epsilon^2 (1 - beta^2) / ((2R_max - R_min)^2 (1 - beta^tau) ln(2/delta))`,
/// evaluated verbatim. It shrinks as `epsilon` shrinks, so it is kept for
/// comparison only; use [`hoeffding_sample_bound`].
pub fn printed_sample_bound(
    epsilon: f64,
    delta: f64,
    beta: f64,
    tau: u32,
    r_min: f64,
    r_max: f64,
) -> Result<f64> {
    let (spread2, trunc) = sample_bound_terms(epsilon, delta, beta, tau, r_min, r_max)?;
    Ok(2.0 * epsilon * epsilon * (1.0 - beta * beta) / (spread2 * trunc * (2.0 / delta).ln()))
}

/// Hoeffding's inequality for `n` independent variables with ranges
/// `[a_i, b_i]`: `P(|S_n - E S_n| >= epsilon) <= 2 exp(-2 epsilon^2 / sum (b_i - a_i)^2)`.
pub fn hoeffding_tail(n: usize, epsilon: f64, ranges: &[(f64, f64)]) -> Result<f64> {
    if ranges.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ranges.len(),
        });
    }
    check_nonneg("epsilon", epsilon)?;
    let mut total = 0.0;
    for &(a, b) in ranges {
        if !(a <= b) {
            return Err(Error::param("ranges", format!("empty range ({a}, {b})")));
        }
        total += (b - a) * (b - a);
    }
    if total == 0.0 {
        return Ok(if epsilon > 0.0 { 0.0 } else { 2.0 });
    }
    Ok(2.0 * (-2.0 * epsilon * epsilon / total).exp())
}

/// All bounds for one parameter set, as printed by the command line tool.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub api_worst_case: f64,
    pub improved_greedy: f64,
    pub rolling_horizon: f64,
    pub approx_plus_horizon: f64,
    pub min_horizon: u32,
    pub sample_bound: u64,
    pub sample_bound_tail: f64,
    pub printed_sample_bound: f64,
}

pub fn bounds_table(
    epsilon: f64,
    delta: f64,
    beta: f64,
    tau: u32,
    r_min: f64,
    r_max: f64,
) -> Result<BoundsTable> {
    let r_bound = r_max.abs().max(r_min.abs());
    let sample_bound = hoeffding_sample_bound(epsilon, delta, beta, tau, r_min, r_max)?;
    Ok(BoundsTable {
        api_worst_case: api_worst_case_bound(delta, epsilon, beta)?,
        improved_greedy: improved_greedy_bound(epsilon, beta)?,
        rolling_horizon: rolling_horizon_bound(r_bound, beta, tau)?,
        approx_plus_horizon: approx_plus_horizon_bound(r_bound, beta, tau, epsilon)?,
        min_horizon: min_horizon_for_eps(epsilon, beta, r_bound)?,
        sample_bound,
        sample_bound_tail: sample_bound_tail(sample_bound, epsilon, beta, tau, r_min, r_max)?,
        printed_sample_bound: printed_sample_bound(epsilon, delta, beta, tau, r_min, r_max)?,
    })
}
