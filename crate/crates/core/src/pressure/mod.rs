//! Separated and spanning sets, partition sums and pressure estimates.

mod estimate;
mod graph;
mod solve;
mod sums;
mod sup_entropy;

pub use estimate::{default_eps_list, pressure_estimate, CurveEntry, EpsSummary, EstimateOptions, PressureCurve};
pub use graph::{CandidatePairs, ConflictGraph, BITSET_LIMIT};
pub use solve::{Method, SolveMode, EXHAUSTIVE_LIMIT, NODE_BUDGET};
pub(crate) use sums::check_eps;
pub use sums::{
    averaged_partition_sum, averaged_sums, birkhoff_sum, extremal, max_separated, min_spanning,
    partition_sum_separated, partition_sum_spanning, seed_for, AveragedSum, ExtremalSetResult, PartitionSumResult,
    SumKind, WordInstance,
};
pub use sup_entropy::{sup_entropy_estimate, SupEntropyCurve, SupEntropyEntry, SupMetricTable};
