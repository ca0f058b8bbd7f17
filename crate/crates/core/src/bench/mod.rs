//! Benchmark harness: analytic oracles, error norms and the built-in experiments.

pub mod experiment;
pub mod metrics;
pub mod norms;
pub mod oracles;

pub use experiment::{run_experiment, ExperimentOutcome, ExperimentSpec, RunOptions, BUILTIN_EXPERIMENTS};
pub use norms::{error_norms, l2_error, ErrorReport};
