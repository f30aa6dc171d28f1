//! Evaluation metrics and benchmark aggregation.

mod benchmark;
mod metrics;

pub use benchmark::{run_benchmark, Aggregates, BenchmarkResult, PairRow, WEIGHTING_NOTE};
pub use metrics::{accuracy, auroc, bi_auroc, weighted_accuracy};
