use rayon::prelude::*;

use super::index::{multiaction_index, IndexMethod};
use crate::error::{Error, Result};
use crate::mdp::MdpModel;
use crate::rmab::{JointAction, JointPolicy, RmabModel};
use crate::stream::StreamRng;

/// Per-arm index table.
///
/// Entry `(x, level)` is the index for raising state `x` from `level` to
/// `level + 1`. The top level `M - 1` cannot be raised and stores 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    num_states: usize,
    num_levels: usize,
    entries: Vec<Option<f64>>,
    /// Set when every entry came from a positive full-indexability report.
    pub certified: bool,
}

/// One computed entry, as written to index reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexRecord {
    pub state: usize,
    pub level: usize,
    pub index: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl IndexTable {
    pub fn new(num_states: usize, num_levels: usize) -> Result<Self> {
        if num_levels < 2 {
            return Err(Error::param("num_levels", "need at least 2 levels"));
        }
        let mut entries = vec![None; num_states * num_levels];
        for s in 0..num_states {
            entries[s * num_levels + num_levels - 1] = Some(0.0);
        }
        Ok(Self {
            num_states,
            num_levels,
            entries,
            certified: false,
        })
    }

    /// Two-action table from `W(x)` values.
    pub fn from_whittle(indices: &[f64]) -> Result<Self> {
        let mut t = Self::new(indices.len(), 2)?;
        for (s, &w) in indices.iter().enumerate() {
            t.set(s, 0, w)?;
        }
        Ok(t)
    }

    /// Table from a dense `[state][level]` array; the top-level column is ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let levels = rows.first().map_or(0, Vec::len);
        let mut t = Self::new(rows.len(), levels)?;
        for (s, row) in rows.iter().enumerate() {
            if row.len() != levels {
                return Err(Error::DimensionMismatch {
                    expected: levels,
                    got: row.len(),
                });
            }
            for (l, &w) in row.iter().enumerate().take(levels - 1) {
                t.set(s, l, w)?;
            }
        }
        Ok(t)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn get(&self, state: usize, level: usize) -> Option<f64> {
        if state >= self.num_states || level >= self.num_levels {
            return None;
        }
        self.entries[state * self.num_levels + level]
    }

    pub fn set(&mut self, state: usize, level: usize, w: f64) -> Result<()> {
        if state >= self.num_states || level + 1 >= self.num_levels {
            return Err(Error::param(
                "level",
                format!("entry ({state}, {level}) outside the settable range"),
            ));
        }
        if !w.is_finite() {
            return Err(Error::param("index", format!("must be finite, got {w}")));
        }
        self.entries[state * self.num_levels + level] = Some(w);
        Ok(())
    }

    /// True when `W(x, level)` is nonincreasing in `level` for every state
    /// with all entries present.
    pub fn is_nonincreasing_in_level(&self) -> bool {
        (0..self.num_states).all(|s| {
            let row: Vec<Option<f64>> = (0..self.num_levels).map(|l| self.get(s, l)).collect();
            row.windows(2).all(|p| match (p[0], p[1]) {
                (Some(a), Some(b)) => b <= a,
                _ => true,
            })
        })
    }
}

/// Computes entries for `states` (all when `None`) and stored levels
/// `levels` (all below the top when `None`).
pub fn build_index_table(
    m: &MdpModel,
    states: Option<&[usize]>,
    levels: Option<&[usize]>,
    method: &IndexMethod<'_>,
) -> Result<(IndexTable, Vec<IndexRecord>)> {
    let mut table = IndexTable::new(m.num_states(), m.num_actions())?;
    let states: Vec<usize> = states.map_or_else(|| (0..m.num_states()).collect(), |s| s.to_vec());
    let levels: Vec<usize> = levels.map_or_else(|| (0..m.num_actions() - 1).collect(), |l| l.to_vec());
    let jobs: Vec<(usize, usize)> = states
        .iter()
        .flat_map(|&s| levels.iter().map(move |&l| (s, l)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(s, l)| {
            let e = multiaction_index(m, s, l + 1, method)?;
            Ok(IndexRecord {
                state: s,
                level: l,
                index: e.index,
                iterations: e.iterations,
                converged: e.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &records {
        table.set(r.state, r.level, r.index)?;
    }
    table.certified = matches!(method, IndexMethod::Exact { .. });
    Ok((table, records))
}

/// Greedy index allocation: start at level 0 everywhere, then repeatedly
/// raise the arm whose current-level index is largest (lowest arm on
/// ties), stopping when the budget is used, no arm can be raised, or the
/// best index is not positive.
pub fn greedy_allocation(tables: &[IndexTable], x: &[usize], budget: usize) -> Result<JointAction> {
    if tables.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: tables.len(),
            got: x.len(),
        });
    }
    let mut a = vec![0; tables.len()];
    let mut used = 0;
    while used < budget {
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in tables.iter().enumerate() {
            if a[i] + 1 >= t.num_levels() {
                continue;
            }
            let w = t.get(x[i], a[i]).ok_or(Error::MissingIndex {
                arm: i,
                state: x[i],
                level: a[i],
            })?;
            if best.map_or(true, |(_, b)| w > b) {
                best = Some((i, w));
            }
        }
        match best {
            Some((i, w)) if w > 0.0 => {
                a[i] += 1;
                used += 1;
            }
            _ => break,
        }
    }
    Ok(a)
}

/// Joint policy applying [`greedy_allocation`] with the model's budget.
#[derive(Debug, Clone)]
pub struct WhittleIndexPolicy {
    pub tables: Vec<IndexTable>,
}

impl WhittleIndexPolicy {
    pub fn new(tables: Vec<IndexTable>) -> Self {
        Self { tables }
    }
}

impl JointPolicy for WhittleIndexPolicy {
    fn decide(&self, m: &RmabModel, x: &[usize], _step: usize, _rng: &mut StreamRng) -> Result<JointAction> {
        greedy_allocation(&self.tables, x, m.budget())
    }
}
