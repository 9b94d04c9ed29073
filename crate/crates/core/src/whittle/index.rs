use super::indexability::IndexabilityReport;
use super::subsidy::{
    decision_tol, optimal_levels, subsidized_model, w_span, SubsidizedGenerative, SubsidyMode,
    ThresholdPolicy,
};
use crate::error::{Error, Result};
use crate::mdp::{sup_distance, MdpModel};
use crate::rollout::{mc_rollout_qvalue, RolloutConfig};
use crate::stream::derive_seed;

/// Default bisection width for exact indices.
pub const DEFAULT_TOL_W: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexEstimate {
    pub index: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_state(m: &MdpModel, x: usize) -> Result<()> {
    if x >= m.num_states() {
        return Err(Error::StateSpace(format!(
            "state {x} out of range 0..{}",
            m.num_states()
        )));
    }
    Ok(())
}

fn check_alpha(m: &MdpModel, alpha: usize) -> Result<()> {
    if alpha == 0 || alpha >= m.num_actions() {
        return Err(Error::param(
            "alpha",
            format!("must lie in 1..{}, got {alpha}", m.num_actions()),
        ));
    }
    Ok(())
}

/// Bisection for `inf { W : a*(x, W) <= alpha - 1 }`, checking at every
/// midpoint that the level set `{y : a*(y, W) <= alpha - 1}` stays nested
/// between the current bracket ends.
fn bisect_level(m: &MdpModel, x: usize, alpha: usize, tol_w: f64) -> Result<IndexEstimate> {
    if !(tol_w > 0.0) {
        return Err(Error::param("tol_w", format!("must be positive, got {tol_w}")));
    }
    let mode = SubsidyMode::for_arm(m);
    let below = alpha - 1;
    let in_set = |levels: &[usize]| -> Vec<bool> { levels.iter().map(|&a| a <= below).collect() };

    let span = w_span(m);
    let (mut lo, mut hi) = (-span, span);
    let mut set_lo = in_set(&optimal_levels(m, lo, mode)?);
    let mut set_hi = in_set(&optimal_levels(m, hi, mode)?);
    if set_lo[x] || !set_hi[x] {
        return Err(Error::Inconclusive(format!(
            "state {x} does not switch between W = {lo} and W = {hi}"
        )));
    }
    let mut iterations = 0;
    while hi - lo >= tol_w {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let set_mid = in_set(&optimal_levels(m, mid, mode)?);
        for s in 0..m.num_states() {
            if set_lo[s] && !set_mid[s] {
                return Err(Error::NonIndexable {
                    subsidy: mid,
                    state: s,
                    detail: format!("left the level-{below} set between W = {lo} and W = {mid}"),
                });
            }
            if set_mid[s] && !set_hi[s] {
                return Err(Error::NonIndexable {
                    subsidy: mid,
                    state: s,
                    detail: format!("left the level-{below} set between W = {mid} and W = {hi}"),
                });
            }
        }
        if set_mid[x] {
            hi = mid;
            set_hi = set_mid;
        } else {
            lo = mid;
            set_lo = set_mid;
        }
    }
    Ok(IndexEstimate {
        index: 0.5 * (lo + hi),
        iterations,
        converged: true,
    })
}

/// Whittle index of state `x` of a two-action arm,
/// `inf { W : x in U_0(W) }`, by bisection to width `tol_w`.
/// `report` must be a positive indexability certificate for this arm.
pub fn exact_whittle_index(m: &MdpModel, x: usize, report: &IndexabilityReport, tol_w: f64) -> Result<f64> {
    SubsidyMode::TwoAction.check(m)?;
    report.certifies(m, 0)?;
    check_state(m, x)?;
    Ok(bisect_level(m, x, 1, tol_w)?.index)
}

/// Parameters of the stochastic-approximation index iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McIndexParams {
    /// Step size `gamma_k = step_scale / (1 + k)^exponent`.
    pub step_scale: f64,
    /// Use 0 for a constant step.
    pub exponent: f64,
    /// Stop once `|Delta| < tol`.
    pub tol: f64,
    pub w_init: f64,
    pub max_outer: usize,
    /// Draw fresh trajectory streams at every outer iteration instead of
    /// reusing the same ones.
    pub resample: bool,
}

impl Default for McIndexParams {
    fn default() -> Self {
        Self {
            step_scale: 1.0,
            exponent: 0.6,
            tol: 0.02,
            w_init: 0.0,
            max_outer: 500,
            resample: false,
        }
    }
}

impl McIndexParams {
    fn validate(&self) -> Result<()> {
        if !(self.step_scale > 0.0) || !self.step_scale.is_finite() {
            return Err(Error::param("step_scale", "must be positive"));
        }
        if !(self.exponent >= 0.0) {
            return Err(Error::param("exponent", "must be nonnegative"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if !self.w_init.is_finite() {
            return Err(Error::param("w_init", "must be finite"));
        }
        if self.max_outer == 0 {
            return Err(Error::param("max_outer", "must be at least 1"));
        }
        Ok(())
    }

    fn step(&self, k: usize) -> f64 {
        self.step_scale / (1.0 + k as f64).powf(self.exponent)
    }
}

#[derive(Debug, Clone)]
pub struct McIndexResult {
    pub index: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `(W_k, Delta_k)` for every outer iteration.
    pub trace: Vec<(f64, f64)>,
}

impl McIndexResult {
    pub fn estimate(&self) -> IndexEstimate {
        IndexEstimate {
            index: self.index,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Stochastic approximation on `W` for the indifference between levels
/// `alpha` and `alpha - 1` at `x`, with rollout estimates whose base
/// policy plays `alpha` above `x` and `alpha - 1` at or below it.
fn mc_level_index(
    m: &MdpModel,
    x: usize,
    alpha: usize,
    cfg: &RolloutConfig,
    params: &McIndexParams,
) -> Result<McIndexResult> {
    params.validate()?;
    cfg.validate()?;
    check_state(m, x)?;
    let mode = SubsidyMode::for_arm(m);
    let base = ThresholdPolicy::scalar_levels(x, alpha - 1, alpha);
    let span = w_span(m);
    let mut w = params.w_init.clamp(-span, span);
    let mut trace = Vec::new();
    for k in 0..params.max_outer {
        let g = SubsidizedGenerative::new(m, w, mode)?;
        let round = if params.resample {
            cfg.with_seed(derive_seed(cfg.seed, &[k as u64]))
        } else {
            *cfg
        };
        let hi = mc_rollout_qvalue(&g, &base, x, alpha, &round)?;
        let lo = mc_rollout_qvalue(&g, &base, x, alpha - 1, &round)?;
        let delta = hi.value - lo.value;
        trace.push((w, delta));
        if delta.abs() < params.tol {
            return Ok(McIndexResult {
                index: w,
                converged: true,
                iterations: k + 1,
                trace,
            });
        }
        w = (w + params.step(k) * delta).clamp(-span, span);
    }
    Ok(McIndexResult {
        index: w,
        converged: false,
        iterations: params.max_outer,
        trace,
    })
}

/// Monte Carlo Whittle index of `x` for a two-action arm.
///
/// Iterates `W_{k+1} = W_k + gamma_k (Q(x,1) - Q(x,0))` where both
/// estimates are rollouts of the threshold policy "active iff y > x" on
/// the subsidized arm, each from its own batch started with the
/// respective action. `W` is clamped to `[-w_span, w_span]`. A run that
/// hits `max_outer` returns `converged = false` with its trace.
pub fn mc_whittle_index(
    m: &MdpModel,
    x: usize,
    cfg: &RolloutConfig,
    params: &McIndexParams,
) -> Result<McIndexResult> {
    SubsidyMode::TwoAction.check(m)?;
    mc_level_index(m, x, 1, cfg, params)
}

/// Parameters of the coupled subsidy/value iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTimescaleParams {
    pub step_scale: f64,
    pub exponent: f64,
    /// Stop once `|Delta W| < tol` and the value sweep residual is below `tol`.
    pub tol: f64,
    pub w_init: f64,
    pub max_iters: usize,
}

impl Default for TwoTimescaleParams {
    fn default() -> Self {
        Self {
            step_scale: 1.0,
            exponent: 0.6,
            tol: 1e-6,
            w_init: 0.0,
            max_iters: 200_000,
        }
    }
}

/// Slow subsidy updates driven by one value-iteration sweep per step.
fn two_timescale_index(m: &MdpModel, x: usize, alpha: usize, p: &TwoTimescaleParams) -> Result<IndexEstimate> {
    let mc = McIndexParams {
        step_scale: p.step_scale,
        exponent: p.exponent,
        tol: p.tol,
        w_init: p.w_init,
        max_outer: p.max_iters,
        resample: false,
    };
    mc.validate()?;
    let mode = SubsidyMode::MultiAction;
    let span = w_span(m);
    let mut w = p.w_init.clamp(-span, span);
    let mut v = vec![0.0; m.num_states()];
    let mut next = vec![0.0; m.num_states()];
    let mut delta = f64::INFINITY;
    let levels = m.num_actions();
    let q = |s: usize, a: usize, w: f64, v: &[f64]| m.q_value(s, a, v) + mode.subsidy(w, a, levels);
    for t in 0..p.max_iters {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = (0..levels).map(|a| q(s, a, w, &v)).fold(f64::NEG_INFINITY, f64::max);
        }
        let residual = sup_distance(&next, &v);
        std::mem::swap(&mut v, &mut next);
        delta = q(x, alpha, w, &v) - q(x, alpha - 1, w, &v);
        if delta.abs() < p.tol && residual < p.tol {
            return Ok(IndexEstimate {
                index: w,
                iterations: t + 1,
                converged: true,
            });
        }
        w = (w + mc.step(t) * delta).clamp(-span, span);
    }
    Err(Error::NonConvergence {
        iterations: p.max_iters,
        residual: delta.abs(),
    })
}

/// How to compute an index entry.
#[derive(Debug, Clone)]
pub enum IndexMethod<'a> {
    /// Bisection on the exact subsidized program; needs a positive
    /// (full) indexability report for the arm.
    Exact { report: &'a IndexabilityReport, tol_w: f64 },
    /// Stochastic approximation with rollout estimates.
    MonteCarlo { cfg: RolloutConfig, params: McIndexParams },
    /// Stochastic approximation with value-iteration sweeps as the fast timescale.
    TwoTimescale(TwoTimescaleParams),
}

impl IndexMethod<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            IndexMethod::Exact { .. } => "exact",
            IndexMethod::MonteCarlo { .. } => "mc",
            IndexMethod::TwoTimescale(_) => "two-timescale",
        }
    }
}

/// Index for raising state `x` from level `alpha - 1` to `alpha`: the
/// subsidy at which both levels are equally good, equivalently
/// `inf { W : a*(x, W) <= alpha - 1 }`. Requires `1 <= alpha <= M - 1`.
pub fn multiaction_index(m: &MdpModel, x: usize, alpha: usize, method: &IndexMethod<'_>) -> Result<IndexEstimate> {
    check_state(m, x)?;
    check_alpha(m, alpha)?;
    match method {
        IndexMethod::Exact { report, tol_w } => {
            report.certifies(m, alpha - 1)?;
            bisect_level(m, x, alpha, *tol_w)
        }
        IndexMethod::MonteCarlo { cfg, params } => Ok(mc_level_index(m, x, alpha, cfg, params)?.estimate()),
        IndexMethod::TwoTimescale(p) => two_timescale_index(m, x, alpha, p),
    }
}

/// Gap `Q_W(x, alpha) - Q_W(x, alpha - 1)` of the exact subsidized program.
pub fn subsidized_gap(m: &MdpModel, x: usize, alpha: usize, w: f64) -> Result<f64> {
    check_state(m, x)?;
    check_alpha(m, alpha)?;
    let mode = SubsidyMode::for_arm(m);
    let sub = subsidized_model(m, w, mode)?;
    let v = crate::mdp::value_iteration(&sub, decision_tol(m), super::subsidy::SUBSIDY_MAX_SWEEPS)?.values;
    Ok(sub.q_value(x, alpha, &v) - sub.q_value(x, alpha - 1, &v))
}
