//! Metrics, oracles and the Monte Carlo benchmark driver.

mod benchmark;
mod metrics;
mod oracle;
mod stability;
mod stats;

pub use benchmark::{run_benchmark, BenchmarkReport, BenchmarkSpec, CellSummary, RuntimeStats};
pub use metrics::{
    adjusted_rand_index, align_and_mse, aligned_balanced_accuracy, balanced_accuracy, permutations,
    MAX_ALIGN_STATES,
};
pub use oracle::{fuzzy_cmeans_oracle, CmeansResult};
pub use stability::{lambda_grid, lambda_stability_curve, StabilityPoint};
pub use stats::{state_conditional_stats, StateStats};
