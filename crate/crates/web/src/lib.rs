//! wasm-bindgen surface for the browser demo in `www/`.
//!
//! Three operations are exposed:
//! * [`compare_aggregators`]: objective curves of averaging vs AdaCons;
//! * [`coefficient_trace`]: mean/std of the AdaCons coefficients per stage;
//! * [`weight_snapshot`]: the per-worker weights of a single round.
//!
//! Each has a plain Rust twin returning `Result<_, String>` so the logic can
//! be tested off-wasm.

use adacons::{
    AdaConsConfig, Aggregator, AggregatorKind, CollectiveBus, GradientSet, ProblemSpec, RunConfig,
    StochasticProblem,
};
use wasm_bindgen::prelude::*;

/// Objective per iteration (index 0 is the starting point) for both rules.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Curves {
    sum: Vec<f64>,
    adacons: Vec<f64>,
    sum_wall_s: f64,
    adacons_wall_s: f64,
}

#[wasm_bindgen]
impl Curves {
    pub fn sum(&self) -> Vec<f64> {
        self.sum.clone()
    }

    pub fn adacons(&self) -> Vec<f64> {
        self.adacons.clone()
    }

    /// Mean per-iteration wall time, seconds.
    #[wasm_bindgen(js_name = sumWallTime)]
    pub fn sum_wall_time(&self) -> f64 {
        self.sum_wall_s
    }

    #[wasm_bindgen(js_name = adaconsWallTime)]
    pub fn adacons_wall_time(&self) -> f64 {
        self.adacons_wall_s
    }
}

/// Stage statistics of the AdaCons coefficients, one entry per iteration.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct CoefficientTrace {
    raw_mean: Vec<f64>,
    raw_std: Vec<f64>,
    smoothed_mean: Vec<f64>,
    smoothed_std: Vec<f64>,
    normalized_mean: Vec<f64>,
    normalized_std: Vec<f64>,
}

#[wasm_bindgen]
impl CoefficientTrace {
    #[wasm_bindgen(js_name = rawMean)]
    pub fn raw_mean(&self) -> Vec<f64> {
        self.raw_mean.clone()
    }
    #[wasm_bindgen(js_name = rawStd)]
    pub fn raw_std(&self) -> Vec<f64> {
        self.raw_std.clone()
    }
    #[wasm_bindgen(js_name = smoothedMean)]
    pub fn smoothed_mean(&self) -> Vec<f64> {
        self.smoothed_mean.clone()
    }
    #[wasm_bindgen(js_name = smoothedStd)]
    pub fn smoothed_std(&self) -> Vec<f64> {
        self.smoothed_std.clone()
    }
    #[wasm_bindgen(js_name = normalizedMean)]
    pub fn normalized_mean(&self) -> Vec<f64> {
        self.normalized_mean.clone()
    }
    #[wasm_bindgen(js_name = normalizedStd)]
    pub fn normalized_std(&self) -> Vec<f64> {
        self.normalized_std.clone()
    }
}

/// Weights of one aggregation round at the initial point.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct WeightSnapshot {
    raw: Vec<f64>,
    normalized: Vec<f64>,
    cosine: Vec<f64>,
    fallback: bool,
}

#[wasm_bindgen]
impl WeightSnapshot {
    /// `<g_i, ḡ> / |g_i|` per worker.
    pub fn raw(&self) -> Vec<f64> {
        self.raw.clone()
    }
    /// Final weights; they sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        self.normalized.clone()
    }
    /// Cosine between each worker gradient and the mean.
    pub fn cosine(&self) -> Vec<f64> {
        self.cosine.clone()
    }
    pub fn fallback(&self) -> bool {
        self.fallback
    }
}

fn adacons_config(beta: f64) -> AdaConsConfig {
    AdaConsConfig {
        beta,
        ..AdaConsConfig::default()
    }
}

fn base_config(
    workers: usize,
    effective_batch: usize,
    iterations: usize,
    seed: u64,
) -> Result<RunConfig, String> {
    RunConfig::with_effective_batch(workers, effective_batch, iterations)
        .map(|c| c.with_seed(seed))
        .map_err(|e| e.to_string())
}

fn objective_curve(trace: &adacons::TrainTrace) -> Vec<f64> {
    std::iter::once(trace.initial_objective)
        .chain(trace.records.iter().map(|r| r.objective))
        .collect()
}

pub fn compare_aggregators_impl(
    dim: usize,
    workers: usize,
    effective_batch: usize,
    iterations: usize,
    seed: u64,
    beta: f64,
) -> Result<Curves, String> {
    let spec = ProblemSpec::linear_regression(dim, 0);
    let base = base_config(workers, effective_batch, iterations, seed)?;
    let sum = adacons::run(
        &base.clone().with_aggregator(AggregatorKind::Average),
        &spec,
    )
    .map_err(|e| e.to_string())?;
    let ada = adacons::run(
        &base.with_aggregator(AggregatorKind::AdaCons(adacons_config(beta))),
        &spec,
    )
    .map_err(|e| e.to_string())?;
    Ok(Curves {
        sum: objective_curve(&sum),
        adacons: objective_curve(&ada),
        sum_wall_s: sum.mean_wall_time(),
        adacons_wall_s: ada.mean_wall_time(),
    })
}

pub fn coefficient_trace_impl(
    dim: usize,
    workers: usize,
    effective_batch: usize,
    iterations: usize,
    seed: u64,
    beta: f64,
) -> Result<CoefficientTrace, String> {
    let spec = ProblemSpec::linear_regression(dim, 0);
    let mut config = base_config(workers, effective_batch, iterations, seed)?
        .with_aggregator(AggregatorKind::AdaCons(adacons_config(beta)));
    config.record_coefficient_stats = true;
    let trace = adacons::run(&config, &spec).map_err(|e| e.to_string())?;
    let mut out = CoefficientTrace::default();
    for stats in trace.records.iter().filter_map(|r| r.coefficient_stats) {
        out.raw_mean.push(stats.raw.mean);
        out.raw_std.push(stats.raw.std);
        out.smoothed_mean.push(stats.smoothed.mean);
        out.smoothed_std.push(stats.smoothed.std);
        out.normalized_mean.push(stats.normalized.mean);
        out.normalized_std.push(stats.normalized.std);
    }
    Ok(out)
}

pub fn weight_snapshot_impl(
    dim: usize,
    workers: usize,
    local_batch: usize,
    seed: u64,
) -> Result<WeightSnapshot, String> {
    if workers == 0 || local_batch == 0 {
        return Err("workers and local batch must be positive".into());
    }
    let problem = ProblemSpec::linear_regression(dim, 0)
        .instantiate(seed)
        .map_err(|e| e.to_string())?;
    let w = problem.initial_point();
    let grads = (0..workers)
        .map(|i| problem.local_gradient(&w, &problem.sample_batch(i, 0, local_batch)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let grads = GradientSet::new(grads).map_err(|e| e.to_string())?;

    let config = AdaConsConfig {
        use_momentum: false,
        ..AdaConsConfig::default()
    };
    let mut aggregator =
        Aggregator::new(AggregatorKind::AdaCons(config), workers).map_err(|e| e.to_string())?;
    let mut bus = CollectiveBus::new(workers).map_err(|e| e.to_string())?;
    let coefficients = aggregator
        .aggregate(&grads, &mut bus)
        .map_err(|e| e.to_string())?
        .coefficients
        .ok_or("AdaCons round returned no coefficients")?;

    let mean: Vec<f64> = (0..dim)
        .map(|k| grads.directions().iter().map(|g| g[k]).sum::<f64>() / workers as f64)
        .collect();
    let mean_norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    let cosine = grads
        .directions()
        .iter()
        .zip(grads.norms())
        .map(|(g, n)| {
            let d: f64 = g.iter().zip(&mean).map(|(a, b)| a * b).sum();
            if *n > 0.0 && mean_norm > 0.0 {
                d / (n * mean_norm)
            } else {
                0.0
            }
        })
        .collect();

    Ok(WeightSnapshot {
        raw: coefficients.raw,
        normalized: coefficients.normalized,
        cosine,
        fallback: coefficients.fallback,
    })
}

/// Objective curves of averaging vs AdaCons on stochastic linear regression.
#[wasm_bindgen(js_name = compareAggregators)]
pub fn compare_aggregators(
    dim: usize,
    workers: usize,
    effective_batch: usize,
    iterations: usize,
    seed: u64,
    beta: f64,
) -> Result<Curves, JsError> {
    compare_aggregators_impl(dim, workers, effective_batch, iterations, seed, beta)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = coefficientTrace)]
pub fn coefficient_trace(
    dim: usize,
    workers: usize,
    effective_batch: usize,
    iterations: usize,
    seed: u64,
    beta: f64,
) -> Result<CoefficientTrace, JsError> {
    coefficient_trace_impl(dim, workers, effective_batch, iterations, seed, beta)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = weightSnapshot)]
pub fn weight_snapshot(
    dim: usize,
    workers: usize,
    local_batch: usize,
    seed: u64,
) -> Result<WeightSnapshot, JsError> {
    weight_snapshot_impl(dim, workers, local_batch, seed).map_err(|e| JsError::new(&e))
}
