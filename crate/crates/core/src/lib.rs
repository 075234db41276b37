//! Consensus-weighted gradient aggregation for synchronous data-parallel SGD.
//!
//! The crate has four layers:
//!
//! * [`collectives`]: a simulated interconnect with all-reduce / all-gather
//!   and an exact element ledger.
//! * [`aggregation`]: the averaging baseline and AdaCons weighting, with its
//!   sorted-EMA momentum and sum-to-one normalization.
//! * [`problems`]: stochastic linear regression on `U[0,1]^d` with keyed
//!   per-worker data streams and closed-form objective / line search.
//! * [`engine`]: the training loop that ties them together and records a
//!   per-iteration [`engine::TrainTrace`].

pub mod aggregation;
pub mod collectives;
pub mod engine;
mod linalg;
pub mod problems;
pub mod stream;

pub use aggregation::{
    aggregate_adacons, aggregate_average, mean_gradient, normalize_unbiased, preconditioner_apply,
    raw_coefficients, AdaConsConfig, AdaConsVariant, AggregationError, Aggregator, AggregatorKind,
    Coefficients, GradientSet, MomentumState,
};
pub use collectives::{CollectiveBus, CollectiveError, CommStats};
pub use engine::{
    run, run_ablation_matrix, run_problem, AblationRun, EngineError, Execution, RunConfig,
    StepRule, TraceRecord, TrainTrace,
};
pub use problems::{
    Batch, LinearRegression, ProblemError, ProblemKind, ProblemSpec, StochasticProblem,
};
