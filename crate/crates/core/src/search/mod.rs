//! Seeded dataset splitting and greedy hyperparameter search.

mod greedy;
mod split;

pub use greedy::{
    greedy_search, Axis, GridPoint, SearchGrid, SearchOutcome, TraceEntry, MAX_PASSES,
};
pub use split::{carve_validation, split, SplitSpec};
