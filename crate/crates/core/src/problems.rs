//! Stochastic objectives with per-worker data streams.
//!
//! The one problem shipped here is stochastic linear regression toward the
//! origin:
//!
//! ```text
//! f(w) = E_{ζ ~ U[0,1]^d} [ ½ (wᵀζ)² ] = ½ wᵀ A w,   A = E[ζζᵀ]
//! ```
//!
//! For the uniform cube `A` has `1/3` on the diagonal and `1/4` elsewhere, so
//! `A v = v/12 + (Σv)/4 · 1` costs O(d) and the population objective and its
//! exact line search are available in closed form.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::dot;
use crate::stream::{fingerprint, StreamKey, INIT_WORKER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("problem dimension must be at least 1")]
    ZeroDimension,
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("unknown problem kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    #[default]
    LinearRegression,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::LinearRegression => "linear_regression",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear_regression" | "linreg" => Ok(ProblemKind::LinearRegression),
            other => Err(ProblemError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub kind: ProblemKind,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn linear_regression(dimension: usize, seed: u64) -> Self {
        Self {
            dimension,
            kind: ProblemKind::LinearRegression,
            seed,
        }
    }

    /// Builds the problem with data streams keyed by `(self.seed, run_seed)`.
    pub fn instantiate(&self, run_seed: u64) -> Result<LinearRegression, ProblemError> {
        match self.kind {
            ProblemKind::LinearRegression => LinearRegression::new(*self, run_seed),
        }
    }
}

/// `B` samples of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    samples: Vec<f64>,
    dimension: usize,
    pub worker_index: usize,
    pub iteration: u64,
}

impl Batch {
    pub fn from_samples(
        samples: Vec<Vec<f64>>,
        worker_index: usize,
        iteration: u64,
    ) -> Result<Self, ProblemError> {
        let dimension = samples
            .first()
            .map(Vec::len)
            .ok_or(ProblemError::EmptyBatch)?;
        if dimension == 0 {
            return Err(ProblemError::ZeroDimension);
        }
        if let Some(bad) = samples.iter().find(|s| s.len() != dimension) {
            return Err(ProblemError::Dimension {
                expected: dimension,
                got: bad.len(),
            });
        }
        Ok(Self {
            samples: samples.concat(),
            dimension,
            worker_index,
            iteration,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dimension)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.samples
    }

    pub fn fingerprint(&self) -> u64 {
        fingerprint(&self.samples)
    }
}

/// A stochastic objective the training engine can drive.
pub trait StochasticProblem: Sync {
    fn dimension(&self) -> usize;

    /// Deterministic in `(worker, iteration, local_batch)` for a given
    /// problem instance.
    fn sample_batch(&self, worker: usize, iteration: u64, local_batch: usize) -> Batch;

    /// Gradient of the empirical loss on `batch`.
    fn local_gradient(&self, w: &[f64], batch: &Batch) -> Result<Vec<f64>, ProblemError>;

    /// Noise-free population objective.
    fn objective(&self, w: &[f64]) -> f64;

    /// Step `eta` minimizing `objective(w - eta * direction)`.
    fn exact_line_search(&self, w: &[f64], direction: &[f64]) -> f64;

    fn initial_point(&self) -> Vec<f64>;
}

/// `½ E[(wᵀζ)²]` with `ζ ~ U[0,1]^d`.
#[derive(Debug, Clone)]
pub struct LinearRegression {
    spec: ProblemSpec,
    run_seed: u64,
}

/// Relative curvature floor below which a direction is treated as zero.
const CURVATURE_EPSILON: f64 = 1e-12;

impl LinearRegression {
    pub fn new(spec: ProblemSpec, run_seed: u64) -> Result<Self, ProblemError> {
        if spec.dimension == 0 {
            return Err(ProblemError::ZeroDimension);
        }
        Ok(Self { spec, run_seed })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn key(&self, worker: u64, iteration: u64) -> StreamKey {
        StreamKey {
            problem_seed: self.spec.seed,
            run_seed: self.run_seed,
            worker,
            iteration,
        }
    }

    fn check_dim(&self, len: usize) -> Result<(), ProblemError> {
        if len != self.spec.dimension {
            return Err(ProblemError::Dimension {
                expected: self.spec.dimension,
                got: len,
            });
        }
        Ok(())
    }

    /// Mean of `½ (wᵀζ)²` over the batch.
    pub fn batch_loss(&self, w: &[f64], batch: &Batch) -> Result<f64, ProblemError> {
        self.check_dim(w.len())?;
        self.check_dim(batch.dimension())?;
        let total: f64 = batch.samples().map(|z| 0.5 * dot(w, z).powi(2)).sum();
        Ok(total / batch.len() as f64)
    }
}

/// `A v` for the second moment of `U[0,1]^d`, without forming `A`.
pub fn second_moment_apply(v: &[f64]) -> Vec<f64> {
    let quarter_sum = v.iter().sum::<f64>() / 4.0;
    v.iter().map(|x| x / 12.0 + quarter_sum).collect()
}

/// `vᵀ A v`
pub fn second_moment_quadratic(v: &[f64]) -> f64 {
    let sum: f64 = v.iter().sum();
    dot(v, v) / 12.0 + sum * sum / 4.0
}

impl StochasticProblem for LinearRegression {
    fn dimension(&self) -> usize {
        self.spec.dimension
    }

    fn sample_batch(&self, worker: usize, iteration: u64, local_batch: usize) -> Batch {
        let mut rng = self.key(worker as u64, iteration).rng();
        let samples = (0..local_batch * self.spec.dimension)
            .map(|_| rng.random::<f64>())
            .collect();
        Batch {
            samples,
            dimension: self.spec.dimension,
            worker_index: worker,
            iteration,
        }
    }

    fn local_gradient(&self, w: &[f64], batch: &Batch) -> Result<Vec<f64>, ProblemError> {
        self.check_dim(w.len())?;
        self.check_dim(batch.dimension())?;
        if batch.is_empty() {
            return Err(ProblemError::EmptyBatch);
        }
        let mut grad = vec![0.0; w.len()];
        for z in batch.samples() {
            let r = dot(w, z);
            for (g, zi) in grad.iter_mut().zip(z) {
                *g += r * zi;
            }
        }
        let inv = 1.0 / batch.len() as f64;
        for g in &mut grad {
            *g *= inv;
        }
        Ok(grad)
    }

    fn objective(&self, w: &[f64]) -> f64 {
        0.5 * second_moment_quadratic(w)
    }

    fn exact_line_search(&self, w: &[f64], direction: &[f64]) -> f64 {
        let curvature = second_moment_quadratic(direction);
        let usable =
            curvature.is_finite() && curvature > CURVATURE_EPSILON * dot(direction, direction);
        if !usable {
            return 0.0;
        }
        let eta = dot(direction, &second_moment_apply(w)) / curvature;
        if eta.is_finite() {
            eta
        } else {
            0.0
        }
    }

    fn initial_point(&self) -> Vec<f64> {
        let mut rng = self.key(INIT_WORKER, 0).rng();
        let scale = 1.0 / (self.spec.dimension as f64).sqrt();
        (0..self.spec.dimension)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(d: usize) -> LinearRegression {
        ProblemSpec::linear_regression(d, 11)
            .instantiate(3)
            .unwrap()
    }

    #[test]
    fn batches_are_deterministic_and_separated() {
        let p = problem(8);
        let a = p.sample_batch(2, 5, 4);
        assert_eq!(a, p.sample_batch(2, 5, 4));
        assert_ne!(a.fingerprint(), p.sample_batch(3, 5, 4).fingerprint());
        assert_ne!(a.fingerprint(), p.sample_batch(2, 6, 4).fingerprint());
        assert_eq!(a.len(), 4);
        assert!(a.as_flat().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn run_seed_changes_streams() {
        let spec = ProblemSpec::linear_regression(8, 11);
        let a = spec.instantiate(1).unwrap().sample_batch(0, 0, 2);
        let b = spec.instantiate(2).unwrap().sample_batch(0, 0, 2);
        assert_ne!(a, b);
    }

    #[test]
    fn gradient_examples() {
        let p = problem(3);
        let batch = p.sample_batch(0, 0, 5);
        assert_eq!(p.local_gradient(&[0.0; 3], &batch).unwrap(), vec![0.0; 3]);

        let one = Batch::from_samples(vec![vec![1.0, 0.0, 0.0]], 0, 0).unwrap();
        assert_eq!(
            p.local_gradient(&[2.0, 5.0, -1.0], &one).unwrap(),
            vec![2.0, 0.0, 0.0]
        );
        assert!(p.local_gradient(&[1.0], &one).is_err());
    }

    #[test]
    fn objective_examples() {
        assert_eq!(problem(4).objective(&[0.0; 4]), 0.0);
        assert!((problem(1).objective(&[1.0]) - 1.0 / 6.0).abs() < 1e-15);
        assert!((problem(2).objective(&[1.0, 1.0]) - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn line_search_examples() {
        let p = problem(3);
        let w = [0.4, -1.0, 2.0];
        assert!((p.exact_line_search(&w, &w) - 1.0).abs() < 1e-14);
        assert_eq!(p.exact_line_search(&[0.0; 3], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(p.exact_line_search(&w, &[0.0; 3]), 0.0);
    }

    #[test]
    fn dense_second_moment_agrees() {
        for d in [1usize, 2, 7, 64] {
            let v: Vec<f64> = (0..d).map(|i| ((i * 7 + 3) as f64).cos()).collect();
            let fast = second_moment_apply(&v);
            for (i, f) in fast.iter().enumerate() {
                let dense: f64 = (0..d)
                    .map(|j| if i == j { 1.0 / 3.0 } else { 0.25 } * v[j])
                    .sum();
                assert!((f - dense).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn initial_point_is_seeded() {
        let p = problem(16);
        assert_eq!(p.initial_point(), p.initial_point());
        let other = ProblemSpec::linear_regression(16, 11)
            .instantiate(4)
            .unwrap();
        assert_ne!(p.initial_point(), other.initial_point());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "linear_regression".parse(),
            Ok(ProblemKind::LinearRegression)
        );
        assert!("mnist".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn batch_from_samples_checks_shape() {
        assert!(Batch::from_samples(vec![], 0, 0).is_err());
        assert!(Batch::from_samples(vec![vec![1.0], vec![1.0, 2.0]], 0, 0).is_err());
    }
}
