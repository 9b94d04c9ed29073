use rayon::prelude::*;

use super::subsidy::{optimal_levels, w_span, SubsidyMode};
use crate::error::{Error, Result};
use crate::mdp::MdpModel;

/// Default number of subsidy grid points.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// First nesting failure found on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NestingViolation {
    pub w_lo: f64,
    pub w_hi: f64,
    /// Grid position of `w_lo`.
    pub grid_index: usize,
    pub state: usize,
    /// Level set `{x : a* <= level}` that shrank.
    pub level: usize,
}

/// Outcome of a grid check. The verdict means exactly "no nesting
/// violation on this grid".
#[derive(Debug, Clone)]
pub struct IndexabilityReport {
    pub indexable: bool,
    pub grid: Vec<f64>,
    /// Levels whose sets were checked.
    pub levels: Vec<usize>,
    /// Optimal level per state at each grid point.
    pub actions: Vec<Vec<usize>>,
    pub violation: Option<NestingViolation>,
    pub num_states: usize,
    pub num_actions: usize,
}

impl IndexabilityReport {
    /// `U_0(W_j) = {x : a*(x, W_j) = 0}`.
    pub fn passive_set(&self, j: usize) -> Vec<usize> {
        self.level_set(j, 0)
    }

    /// `{x : a*(x, W_j) <= level}`.
    pub fn level_set(&self, j: usize, level: usize) -> Vec<usize> {
        self.actions[j]
            .iter()
            .enumerate()
            .filter(|(_, &a)| a <= level)
            .map(|(s, _)| s)
            .collect()
    }

    pub(crate) fn certifies(&self, m: &MdpModel, level: usize) -> Result<()> {
        if self.num_states != m.num_states() || self.num_actions != m.num_actions() {
            return Err(Error::NotCertified(format!(
                "report covers {} states x {} levels, arm has {} x {}",
                self.num_states,
                self.num_actions,
                m.num_states(),
                m.num_actions()
            )));
        }
        if !self.indexable {
            return Err(Error::NotCertified(match &self.violation {
                Some(v) => format!(
                    "nesting violated between W = {} and W = {} at state {}",
                    v.w_lo, v.w_hi, v.state
                ),
                None => "report is negative".into(),
            }));
        }
        if !self.levels.contains(&level) {
            return Err(Error::NotCertified(format!("level {level} was not checked")));
        }
        Ok(())
    }
}

/// `points` evenly spaced subsidies over `[-w_span, w_span]`.
pub fn default_grid(m: &MdpModel, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::param("grid_points", "need at least 2 points"));
    }
    let span = w_span(m);
    let step = 2.0 * span / (points - 1) as f64;
    Ok((0..points)
        .map(|j| if j == points - 1 { span } else { -span + step * j as f64 })
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::param("grid", "need at least 2 points"));
    }
    if grid.iter().any(|w| !w.is_finite()) || grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::param("grid", "must be finite and strictly increasing"));
    }
    Ok(())
}

fn run_check(m: &MdpModel, grid: &[f64], levels: Vec<usize>, mode: SubsidyMode) -> Result<IndexabilityReport> {
    check_grid(grid)?;
    mode.check(m)?;
    let top = m.num_actions() - 1;
    if let Some(&bad) = levels.iter().find(|&&l| l > top) {
        return Err(Error::param("levels", format!("level {bad} exceeds top level {top}")));
    }
    let actions: Vec<Vec<usize>> = grid
        .par_iter()
        .map(|&w| optimal_levels(m, w, mode))
        .collect::<Result<_>>()?;

    let first = &actions[0];
    let last = &actions[actions.len() - 1];
    if let Some(s) = first.iter().position(|&a| a != top) {
        return Err(Error::Inconclusive(format!(
            "at W = {} state {s} plays level {} instead of the top level; widen the grid",
            grid[0], first[s]
        )));
    }
    if let Some(s) = last.iter().position(|&a| a != 0) {
        return Err(Error::Inconclusive(format!(
            "at W = {} state {s} plays level {} instead of 0; widen the grid",
            grid[grid.len() - 1],
            last[s]
        )));
    }

    let mut violation = None;
    'scan: for j in 0..grid.len() - 1 {
        for &level in &levels {
            for s in 0..m.num_states() {
                if actions[j][s] <= level && actions[j + 1][s] > level {
                    violation = Some(NestingViolation {
                        w_lo: grid[j],
                        w_hi: grid[j + 1],
                        grid_index: j,
                        state: s,
                        level,
                    });
                    break 'scan;
                }
            }
        }
    }
    Ok(IndexabilityReport {
        indexable: violation.is_none(),
        grid: grid.to_vec(),
        levels,
        actions,
        violation,
        num_states: m.num_states(),
        num_actions: m.num_actions(),
    })
}

/// Two-action indexability on `grid`: the passive set must be empty at
/// the first point, full at the last, and grow by inclusion in between.
/// Endpoints that are not empty/full give an inconclusive error.
pub fn check_indexability(m: &MdpModel, grid: &[f64]) -> Result<IndexabilityReport> {
    run_check(m, grid, vec![0], SubsidyMode::TwoAction)
}

/// Full indexability on `grid`: for each `level` in `levels` (all levels
/// when `None`) the set `{x : a*(x, W) <= level}` grows by inclusion in `W`.
pub fn check_full_indexability(
    m: &MdpModel,
    grid: &[f64],
    levels: Option<&[usize]>,
) -> Result<IndexabilityReport> {
    let levels = levels.map_or_else(|| (0..m.num_actions()).collect(), |l| l.to_vec());
    run_check(m, grid, levels, SubsidyMode::for_arm(m))
}
