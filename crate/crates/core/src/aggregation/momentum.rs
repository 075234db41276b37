//! Order-invariant exponential moving average of subspace coefficients.
//!
//! Worker indices carry no meaning across iterations (each worker sees an
//! arbitrary batch), so the average is kept over the *sorted* coefficients.
//! Each step sorts the incoming coefficients, blends them into the sorted
//! buffer, and hands the smoothed values back to workers by rank: the worker
//! holding the k-th smallest raw coefficient this iteration receives the k-th
//! entry of the buffer.

use super::AggregationError;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    sorted_ema: Vec<f64>,
    beta: f64,
    initialized: bool,
    iteration: u64,
}

impl MomentumState {
    pub fn new(worker_count: usize, beta: f64) -> Result<Self, AggregationError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(AggregationError::Config(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        if worker_count == 0 {
            return Err(AggregationError::Empty);
        }
        Ok(Self {
            sorted_ema: vec![0.0; worker_count],
            beta,
            initialized: false,
            iteration: 0,
        })
    }

    /// Blends `raw` (worker order) into the sorted average and returns the
    /// smoothed coefficients in worker order.
    ///
    /// The first call seeds the buffer with `sort(raw)` and so returns `raw`
    /// unchanged. No bias correction is applied.
    pub fn apply(&mut self, raw: &[f64]) -> Result<Vec<f64>, AggregationError> {
        if raw.len() != self.sorted_ema.len() {
            return Err(AggregationError::Dimension {
                expected: self.sorted_ema.len(),
                got: raw.len(),
            });
        }
        let order = sort_permutation(raw);
        if self.initialized {
            let keep = self.beta;
            let take = 1.0 - self.beta;
            for (ema, &worker) in self.sorted_ema.iter_mut().zip(&order) {
                *ema = keep * *ema + take * raw[worker];
            }
        } else {
            for (ema, &worker) in self.sorted_ema.iter_mut().zip(&order) {
                *ema = raw[worker];
            }
            self.initialized = true;
        }
        self.iteration += 1;

        let mut out = vec![0.0; raw.len()];
        for (rank, &worker) in order.iter().enumerate() {
            out[worker] = self.sorted_ema[rank];
        }
        Ok(out)
    }

    pub fn sorted_ema(&self) -> &[f64] {
        &self.sorted_ema
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn worker_count(&self) -> usize {
        self.sorted_ema.len()
    }
}

/// Worker indices in ascending order of their value; equal values keep
/// worker-index order. `order[k]` is the worker at rank `k`.
pub fn sort_permutation(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps ties in index order
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}
