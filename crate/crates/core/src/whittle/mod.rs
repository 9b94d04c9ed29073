//! Subsidized single-arm analysis: indexability checks, exact and Monte
//! Carlo Whittle indices, multi-level indices and greedy allocation.

mod index;
mod indexability;
mod subsidy;
mod table;

pub use index::{
    exact_whittle_index, mc_whittle_index, multiaction_index, subsidized_gap, IndexEstimate, IndexMethod,
    McIndexParams, McIndexResult, TwoTimescaleParams, DEFAULT_TOL_W,
};
pub use indexability::{
    check_full_indexability, check_indexability, default_grid, IndexabilityReport, NestingViolation,
    DEFAULT_GRID_POINTS,
};
pub use subsidy::{
    passive_set, subsidized_dp, subsidized_model, w_span, SubsidizedGenerative, SubsidizedSolution,
    SubsidyMode, ThresholdPolicy, SUBSIDY_MAX_SWEEPS,
};
pub use table::{build_index_table, greedy_allocation, IndexRecord, IndexTable, WhittleIndexPolicy};
