//! Synchronous data-parallel training loop.
//!
//! Each iteration every worker draws its own batch and computes a gradient at
//! the same parameters `w_t`, the gradients are aggregated through a
//! [`CollectiveBus`], a step size is chosen, and `w_{t+1} = w_t - eta * d_t`.
//! Worker gradients may be computed on threads; results are always placed by
//! worker index before the bus sees them, so the trace is the same whichever
//! way they were computed.

use thiserror::Error;
use web_time::Instant;

use crate::aggregation::{
    AdaConsConfig, AdaConsVariant, AggregationError, Aggregator, AggregatorKind, CoefficientStats,
    GradientSet,
};
use crate::collectives::{CollectiveBus, CommStats};
use crate::linalg::axpy;
use crate::problems::{ProblemError, ProblemSpec, StochasticProblem};

/// Allowed relative increase of the exact objective between iterations under
/// exact line search before the run is declared broken.
pub const DESCENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("iteration {iteration}: non-finite {quantity} ({value})")]
    NonFinite {
        iteration: u64,
        quantity: &'static str,
        value: f64,
    },
    #[error("iteration {iteration}: objective rose from {previous:e} to {current:e} under exact line search")]
    DescentViolation {
        iteration: u64,
        previous: f64,
        current: f64,
    },
}

impl EngineError {
    /// True for divergence diagnostics as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            EngineError::NonFinite { .. } | EngineError::DescentViolation { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    ExactLineSearch,
    Fixed(f64),
}

/// How worker gradients are computed within an iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Sequential,
    /// Workers visited from last to first.
    Reversed,
    /// Workers spread over scoped threads.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub worker_count: usize,
    pub local_batch: usize,
    pub iterations: usize,
    pub aggregator: AggregatorKind,
    pub step_rule: StepRule,
    pub seed: u64,
    pub record_coefficient_stats: bool,
    pub execution: Execution,
    /// Test hook: every worker draws worker 0's batch.
    pub shared_batches: bool,
}

impl RunConfig {
    pub fn new(worker_count: usize, local_batch: usize, iterations: usize) -> Self {
        Self {
            worker_count,
            local_batch,
            iterations,
            aggregator: AggregatorKind::AdaCons(AdaConsConfig::default()),
            step_rule: StepRule::ExactLineSearch,
            seed: 0,
            record_coefficient_stats: false,
            execution: Execution::Sequential,
            shared_batches: false,
        }
    }

    /// Config for a given effective (global) batch, which must split evenly
    /// across the workers.
    pub fn with_effective_batch(
        worker_count: usize,
        effective_batch: usize,
        iterations: usize,
    ) -> Result<Self, EngineError> {
        if worker_count == 0 || effective_batch % worker_count != 0 {
            return Err(EngineError::Config(format!(
                "effective batch {effective_batch} is not divisible by {worker_count} workers"
            )));
        }
        Ok(Self::new(
            worker_count,
            effective_batch / worker_count,
            iterations,
        ))
    }

    pub fn effective_batch(&self) -> usize {
        self.worker_count * self.local_batch
    }

    pub fn with_aggregator(mut self, aggregator: AggregatorKind) -> Self {
        self.aggregator = aggregator;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.worker_count == 0 || self.local_batch == 0 || self.iterations == 0 {
            return Err(EngineError::Config(format!(
                "workers ({}), local batch ({}) and iterations ({}) must all be positive",
                self.worker_count, self.local_batch, self.iterations
            )));
        }
        if let StepRule::Fixed(eta) = self.step_rule {
            if !eta.is_finite() {
                return Err(EngineError::Config(format!(
                    "fixed step {eta} is not finite"
                )));
            }
        }
        if let AggregatorKind::AdaCons(c) = &self.aggregator {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 1-based.
    pub iteration: u64,
    /// Exact objective after this iteration's update.
    pub objective: f64,
    pub step_size: f64,
    /// Only filled when `record_coefficient_stats` is set.
    pub coefficient_stats: Option<CoefficientStats>,
    pub lambda: Option<f64>,
    /// Sum of the final per-worker weights, AdaCons only.
    pub weight_sum: Option<f64>,
    pub fallback: bool,
    /// Ledger delta of this iteration.
    pub comm: CommStats,
    pub wall_time_s: f64,
    /// Fingerprint of every worker's batch, combined in worker order.
    pub batch_digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub label: String,
    pub initial_objective: f64,
    pub records: Vec<TraceRecord>,
    pub final_weights: Vec<f64>,
}

impl TrainTrace {
    pub fn final_objective(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }

    pub fn total_comm(&self) -> CommStats {
        self.records
            .iter()
            .fold(CommStats::default(), |acc, r| acc + r.comm)
    }

    pub fn mean_wall_time(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.wall_time_s).sum::<f64>() / self.records.len() as f64
    }

    pub fn fallback_count(&self) -> usize {
        self.records.iter().filter(|r| r.fallback).count()
    }

    /// Equality of everything except wall-clock timings.
    pub fn same_trajectory(&self, other: &TrainTrace) -> bool {
        let bits = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.label == other.label
            && bits(self.initial_objective, other.initial_objective)
            && self.final_weights.len() == other.final_weights.len()
            && self
                .final_weights
                .iter()
                .zip(&other.final_weights)
                .all(|(a, b)| bits(*a, *b))
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                let mut a = a.clone();
                a.wall_time_s = b.wall_time_s;
                a == *b && bits(a.objective, b.objective)
            })
    }
}

/// Trains `spec` under `config`, seeding the data streams with `config.seed`.
pub fn run(config: &RunConfig, spec: &ProblemSpec) -> Result<TrainTrace, EngineError> {
    let problem = spec.instantiate(config.seed)?;
    run_problem(config, &problem)
}

pub fn run_problem<P: StochasticProblem>(
    config: &RunConfig,
    problem: &P,
) -> Result<TrainTrace, EngineError> {
    config.validate()?;
    let n = config.worker_count;
    let mut aggregator = Aggregator::new(config.aggregator, n)?;
    let mut bus = CollectiveBus::new(n).map_err(AggregationError::from)?;

    let mut w = problem.initial_point();
    let initial_objective = problem.objective(&w);
    ensure_finite(0, "initial objective", initial_objective)?;
    let mut previous = initial_objective;
    let mut records = Vec::with_capacity(config.iterations);

    for t in 1..=config.iterations as u64 {
        let started = Instant::now();
        let (gradients, batch_digest) = worker_gradients(config, problem, &w, t - 1)?;
        let grads = match GradientSet::new(gradients) {
            Ok(g) => g,
            Err(AggregationError::NonFinite { .. }) => {
                return Err(EngineError::NonFinite {
                    iteration: t,
                    quantity: "worker gradient",
                    value: f64::NAN,
                })
            }
            Err(e) => return Err(e.into()),
        };

        let ledger_before = bus.ledger();
        let aggregate = aggregator.aggregate(&grads, &mut bus)?;
        let comm = bus.ledger().since(&ledger_before);
        if let Some(bad) = aggregate.direction.iter().find(|x| !x.is_finite()) {
            return Err(EngineError::NonFinite {
                iteration: t,
                quantity: "aggregated direction",
                value: *bad,
            });
        }

        let step_size = match config.step_rule {
            StepRule::ExactLineSearch => problem.exact_line_search(&w, &aggregate.direction),
            StepRule::Fixed(eta) => eta,
        };
        ensure_finite(t, "step size", step_size)?;
        axpy(-step_size, &aggregate.direction, &mut w);

        let objective = problem.objective(&w);
        ensure_finite(t, "objective", objective)?;
        if config.step_rule == StepRule::ExactLineSearch
            && objective > previous + DESCENT_TOLERANCE * previous.abs()
        {
            return Err(EngineError::DescentViolation {
                iteration: t,
                previous,
                current: objective,
            });
        }
        previous = objective;
        let wall_time_s = started.elapsed().as_secs_f64();

        let coefficients = aggregate.coefficients.as_ref();
        records.push(TraceRecord {
            iteration: t,
            objective,
            step_size,
            coefficient_stats: coefficients
                .filter(|_| config.record_coefficient_stats)
                .map(|c| c.stats()),
            lambda: coefficients.map(|c| c.lambda),
            weight_sum: coefficients.map(|c| c.normalized.iter().sum()),
            fallback: coefficients.is_some_and(|c| c.fallback),
            comm,
            wall_time_s,
            batch_digest,
        });
    }

    Ok(TrainTrace {
        label: config.aggregator.label().to_string(),
        initial_objective,
        records,
        final_weights: w,
    })
}

fn ensure_finite(iteration: u64, quantity: &'static str, value: f64) -> Result<(), EngineError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(EngineError::NonFinite {
            iteration,
            quantity,
            value,
        })
    }
}

type WorkerOutput = Result<(Vec<f64>, u64), ProblemError>;

fn worker_step<P: StochasticProblem>(
    config: &RunConfig,
    problem: &P,
    w: &[f64],
    iteration: u64,
    worker: usize,
) -> WorkerOutput {
    let stream = if config.shared_batches { 0 } else { worker };
    let batch = problem.sample_batch(stream, iteration, config.local_batch);
    let grad = problem.local_gradient(w, &batch)?;
    Ok((grad, batch.fingerprint()))
}

/// Gradients in worker-index order, plus a digest of all batches.
fn worker_gradients<P: StochasticProblem>(
    config: &RunConfig,
    problem: &P,
    w: &[f64],
    iteration: u64,
) -> Result<(Vec<Vec<f64>>, u64), EngineError> {
    let n = config.worker_count;
    let mut slots: Vec<Option<WorkerOutput>> = (0..n).map(|_| None).collect();
    match config.execution {
        Execution::Sequential => {
            for (worker, slot) in slots.iter_mut().enumerate() {
                *slot = Some(worker_step(config, problem, w, iteration, worker));
            }
        }
        Execution::Reversed => {
            for (worker, slot) in slots.iter_mut().enumerate().rev() {
                *slot = Some(worker_step(config, problem, w, iteration, worker));
            }
        }
        Execution::Parallel => {
            let threads = std::thread::available_parallelism()
                .map_or(1, |p| p.get())
                .min(n);
            let per_thread = n.div_ceil(threads);
            std::thread::scope(|scope| {
                for (chunk_index, chunk) in slots.chunks_mut(per_thread).enumerate() {
                    scope.spawn(move || {
                        for (offset, slot) in chunk.iter_mut().enumerate() {
                            let worker = chunk_index * per_thread + offset;
                            *slot = Some(worker_step(config, problem, w, iteration, worker));
                        }
                    });
                }
            });
        }
    }

    let mut gradients = Vec::with_capacity(n);
    let mut digest = 0xcbf2_9ce4_8422_2325u64;
    for slot in slots {
        let (grad, fp) = slot.expect("every worker slot is filled")?;
        digest = (digest ^ fp)
            .wrapping_mul(0x0000_0100_0000_01b3)
            .rotate_left(17);
        gradients.push(grad);
    }
    Ok((gradients, digest))
}

/// One labelled trace of an ablation sweep.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub label: &'static str,
    pub aggregator: AggregatorKind,
    pub trace: TrainTrace,
}

/// The averaging baseline followed by the four AdaCons variants
/// (raw, momentum, normalization, momentum + normalization), all on the same
/// data streams.
///
/// The AdaCons parameters (beta, epsilon, fallback lambda) come from
/// `base.aggregator` when it is AdaCons, otherwise from the defaults.
pub fn run_ablation_matrix(
    base: &RunConfig,
    spec: &ProblemSpec,
) -> Result<Vec<AblationRun>, EngineError> {
    let adacons = match base.aggregator {
        AggregatorKind::AdaCons(c) => c,
        AggregatorKind::Average => AdaConsConfig::default(),
    };
    let kinds = std::iter::once(AggregatorKind::Average).chain(
        AdaConsVariant::ALL
            .into_iter()
            .map(|v| AggregatorKind::AdaCons(adacons.for_variant(v))),
    );
    kinds
        .map(|kind| {
            let config = base.clone().with_aggregator(kind);
            Ok(AblationRun {
                label: kind.label(),
                aggregator: kind,
                trace: run(&config, spec)?,
            })
        })
        .collect()
}
