//! Gradient aggregation operators.
//!
//! Two operators turn the `N` worker gradients of one synchronous step into a
//! single update direction:
//!
//! * [`aggregate_average`]: the usual arithmetic mean (one all-reduce).
//! * [`aggregate_adacons`]: consensus weighting. Each worker gradient `g_i`
//!   is weighted by how well it agrees with the mean `ḡ`:
//!
//!   ```text
//!   raw_i      = <g_i, ḡ> / |g_i|              (one first-order step in the span of the g_i)
//!   smoothed   = sorted EMA of raw             (optional, see MomentumState)
//!   u_i        = smoothed_i / |g_i|
//!   gamma_i    = u_i / sum_j u_j               (optional sum-to-one normalization)
//!   direction  = sum_i gamma_i g_i
//!   ```
//!
//!   The round costs two all-reduces of length `d` plus one all-gather of
//!   `N` scalars.
//!
//! Coefficients are stored with a positive sign; the descent sign lives in the
//! optimizer update `w <- w - eta * direction`.

mod momentum;
mod precondition;

pub use momentum::{sort_permutation, MomentumState};
pub use precondition::preconditioner_apply;

use thiserror::Error;

use crate::collectives::{CollectiveBus, CollectiveError};
use crate::linalg::{dot, mean_std, norm, scaled};

pub const DEFAULT_BETA: f64 = 0.99;
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error(transparent)]
    Collective(#[from] CollectiveError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("gradient set is empty")]
    Empty,
    #[error("worker {worker} gradient has a non-finite entry at {index}")]
    NonFinite { worker: usize, index: usize },
    #[error("invalid aggregation config: {0}")]
    Config(String),
}

/// The `N` worker gradients of one step; the columns of the subspace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    directions: Vec<Vec<f64>>,
    norms: Vec<f64>,
    dimension: usize,
}

impl GradientSet {
    pub fn new(directions: Vec<Vec<f64>>) -> Result<Self, AggregationError> {
        let dimension = directions
            .first()
            .map(Vec::len)
            .ok_or(AggregationError::Empty)?;
        if dimension == 0 {
            return Err(AggregationError::Empty);
        }
        for (worker, g) in directions.iter().enumerate() {
            if g.len() != dimension {
                return Err(AggregationError::Dimension {
                    expected: dimension,
                    got: g.len(),
                });
            }
            if let Some(index) = g.iter().position(|x| !x.is_finite()) {
                return Err(AggregationError::NonFinite { worker, index });
            }
        }
        let norms = directions.iter().map(|g| norm(g)).collect();
        Ok(Self {
            directions,
            norms,
            dimension,
        })
    }

    pub fn worker_count(&self) -> usize {
        self.directions.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn get(&self, worker: usize) -> &[f64] {
        &self.directions[worker]
    }

    /// Euclidean norm of each worker gradient.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn into_directions(self) -> Vec<Vec<f64>> {
        self.directions
    }
}

/// How the sum-to-one scale is computed when normalization is on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NormalizationForm {
    /// `lambda = 1 / sum_i smoothed_i / |g_i|`; the weights sum to one.
    #[default]
    SumToOne,
    /// `lambda = 1 / sum_i smoothed_i`. Kept for comparison only: the weights
    /// do not sum to one unless every `|g_i| = 1`.
    UnsquaredNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaConsConfig {
    /// EMA factor of the sorted coefficient momentum, in (0, 1).
    pub beta: f64,
    pub use_momentum: bool,
    pub use_normalization: bool,
    /// Guard for vanishing norms and denominators.
    pub epsilon: f64,
    /// Scale applied to the per-worker weights when normalization is off.
    pub fallback_lambda: f64,
    pub normalization: NormalizationForm,
}

impl Default for AdaConsConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            use_momentum: true,
            use_normalization: true,
            epsilon: DEFAULT_EPSILON,
            fallback_lambda: 1.0,
            normalization: NormalizationForm::SumToOne,
        }
    }
}

impl AdaConsConfig {
    pub fn validate(&self) -> Result<(), AggregationError> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(AggregationError::Config(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(AggregationError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !self.fallback_lambda.is_finite() {
            return Err(AggregationError::Config(
                "fallback_lambda must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn for_variant(self, variant: AdaConsVariant) -> Self {
        let (use_momentum, use_normalization) = variant.flags();
        Self {
            use_momentum,
            use_normalization,
            ..self
        }
    }
}

/// The four momentum × normalization combinations of the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdaConsVariant {
    /// Plain consensus weights with `lambda = fallback_lambda`.
    Raw,
    Momentum,
    Normalization,
    MomentumNormalization,
}

impl AdaConsVariant {
    pub const ALL: [AdaConsVariant; 4] = [
        AdaConsVariant::Raw,
        AdaConsVariant::Momentum,
        AdaConsVariant::Normalization,
        AdaConsVariant::MomentumNormalization,
    ];

    pub fn flags(self) -> (bool, bool) {
        match self {
            AdaConsVariant::Raw => (false, false),
            AdaConsVariant::Momentum => (true, false),
            AdaConsVariant::Normalization => (false, true),
            AdaConsVariant::MomentumNormalization => (true, true),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AdaConsVariant::Raw => "adacons-raw",
            AdaConsVariant::Momentum => "adacons-momentum",
            AdaConsVariant::Normalization => "adacons-normalization",
            AdaConsVariant::MomentumNormalization => "adacons",
        }
    }
}

/// Coefficients of one AdaCons round, one entry per worker at every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    /// `<g_i, ḡ> / |g_i|`
    pub raw: Vec<f64>,
    /// After the sorted EMA (equal to `raw` when momentum is off).
    pub smoothed: Vec<f64>,
    /// Final weights `gamma_i` applied to `g_i`.
    pub normalized: Vec<f64>,
    pub lambda: f64,
    /// The uniform `1/N` weights were used because the normalization
    /// denominator was not safely positive.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoefficientStats {
    pub raw: Summary,
    pub smoothed: Summary,
    pub normalized: Summary,
}

impl Coefficients {
    pub fn stats(&self) -> CoefficientStats {
        CoefficientStats {
            raw: Summary::of(&self.raw),
            smoothed: Summary::of(&self.smoothed),
            normalized: Summary::of(&self.normalized),
        }
    }
}

/// Output of [`normalize_unbiased`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub gamma: Vec<f64>,
    /// Scale applied to `u`; zero when the fallback fired.
    pub lambda: f64,
    pub fallback: bool,
}

/// `ḡ = (1/N) sum_i g_i` through one all-reduce.
pub fn mean_gradient(
    grads: &GradientSet,
    bus: &mut CollectiveBus,
) -> Result<Vec<f64>, AggregationError> {
    let mut sum = bus.all_reduce_sum(grads.directions())?;
    let n = grads.worker_count() as f64;
    for x in &mut sum {
        *x /= n;
    }
    Ok(sum)
}

/// The averaging baseline. Identical to [`mean_gradient`].
pub fn aggregate_average(
    grads: &GradientSet,
    bus: &mut CollectiveBus,
) -> Result<Vec<f64>, AggregationError> {
    mean_gradient(grads, bus)
}

/// `raw_i = <g_i, mean> / |g_i|`, or 0 for a gradient with norm below
/// `epsilon`.
pub fn raw_coefficients(
    grads: &GradientSet,
    mean: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>, AggregationError> {
    if mean.len() != grads.dimension() {
        return Err(AggregationError::Dimension {
            expected: grads.dimension(),
            got: mean.len(),
        });
    }
    Ok(grads
        .directions()
        .iter()
        .zip(grads.norms())
        .map(|(g, &n)| if n < epsilon { 0.0 } else { dot(g, mean) / n })
        .collect())
}

/// Per-worker weights `u_i = smoothed_i / |g_i|` before any global scale.
pub fn unscaled_weights(
    smoothed: &[f64],
    grads: &GradientSet,
    epsilon: f64,
) -> Result<Vec<f64>, AggregationError> {
    if smoothed.len() != grads.worker_count() {
        return Err(AggregationError::Dimension {
            expected: grads.worker_count(),
            got: smoothed.len(),
        });
    }
    Ok(smoothed
        .iter()
        .zip(grads.norms())
        .map(|(&s, &n)| if n < epsilon { 0.0 } else { s / n })
        .collect())
}

/// Rescales `u_i = smoothed_i / |g_i|` so the weights sum to one.
///
/// Falls back to uniform `1/N` weights (with `fallback = true`) when the sum
/// of `u` is non-positive or smaller than `epsilon` in magnitude.
pub fn normalize_unbiased(
    smoothed: &[f64],
    grads: &GradientSet,
    epsilon: f64,
) -> Result<Normalized, AggregationError> {
    normalize_with(smoothed, grads, epsilon, NormalizationForm::SumToOne)
}

pub fn normalize_with(
    smoothed: &[f64],
    grads: &GradientSet,
    epsilon: f64,
    form: NormalizationForm,
) -> Result<Normalized, AggregationError> {
    let u = unscaled_weights(smoothed, grads, epsilon)?;
    let denominator: f64 = match form {
        NormalizationForm::SumToOne => u.iter().sum(),
        NormalizationForm::UnsquaredNorm => smoothed
            .iter()
            .zip(grads.norms())
            .filter(|(_, &n)| n >= epsilon)
            .map(|(&s, _)| s)
            .sum(),
    };
    if denominator <= 0.0 || denominator.abs() < epsilon || !denominator.is_finite() {
        let n = u.len();
        return Ok(Normalized {
            gamma: vec![1.0 / n as f64; n],
            lambda: 0.0,
            fallback: true,
        });
    }
    let lambda = 1.0 / denominator;
    Ok(Normalized {
        gamma: scaled(lambda, &u),
        lambda,
        fallback: false,
    })
}

/// One full AdaCons round through `bus`.
///
/// Pipeline: all-reduce for `ḡ`, raw coefficients, all-gather of the raw
/// coefficients, sorted EMA (if enabled), weights, all-reduce of
/// `gamma_i * g_i`. `state` is only touched when momentum is enabled.
pub fn aggregate_adacons(
    grads: &GradientSet,
    state: &mut MomentumState,
    config: &AdaConsConfig,
    bus: &mut CollectiveBus,
) -> Result<(Vec<f64>, Coefficients), AggregationError> {
    config.validate()?;
    if bus.worker_count() != grads.worker_count() {
        return Err(CollectiveError::Participation {
            expected: bus.worker_count(),
            got: grads.worker_count(),
        }
        .into());
    }

    let mean = mean_gradient(grads, bus)?;
    let raw = raw_coefficients(grads, &mean, config.epsilon)?;
    let gathered = bus.all_gather(&raw)?;
    let smoothed = if config.use_momentum {
        state.apply(&gathered)?
    } else {
        gathered
    };

    let weights = if config.use_normalization {
        normalize_with(&smoothed, grads, config.epsilon, config.normalization)?
    } else {
        let u = unscaled_weights(&smoothed, grads, config.epsilon)?;
        Normalized {
            gamma: scaled(config.fallback_lambda, &u),
            lambda: config.fallback_lambda,
            fallback: false,
        }
    };

    let weighted: Vec<Vec<f64>> = grads
        .directions()
        .iter()
        .zip(&weights.gamma)
        .map(|(g, &gamma)| scaled(gamma, g))
        .collect();
    let direction = bus.all_reduce_sum(&weighted)?;

    Ok((
        direction,
        Coefficients {
            raw,
            smoothed,
            normalized: weights.gamma,
            lambda: weights.lambda,
            fallback: weights.fallback,
        },
    ))
}

/// Which aggregation rule a training run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregatorKind {
    Average,
    AdaCons(AdaConsConfig),
}

impl AggregatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            AggregatorKind::Average => "sum",
            AggregatorKind::AdaCons(c) => match (c.use_momentum, c.use_normalization) {
                (false, false) => AdaConsVariant::Raw.label(),
                (true, false) => AdaConsVariant::Momentum.label(),
                (false, true) => AdaConsVariant::Normalization.label(),
                (true, true) => AdaConsVariant::MomentumNormalization.label(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub direction: Vec<f64>,
    /// `None` for the averaging baseline.
    pub coefficients: Option<Coefficients>,
}

/// An aggregation rule together with whatever state it carries between
/// steps.
#[derive(Debug, Clone)]
pub struct Aggregator {
    kind: AggregatorKind,
    momentum: Option<MomentumState>,
}

impl Aggregator {
    pub fn new(kind: AggregatorKind, worker_count: usize) -> Result<Self, AggregationError> {
        let momentum = match &kind {
            AggregatorKind::Average => None,
            AggregatorKind::AdaCons(config) => {
                config.validate()?;
                Some(MomentumState::new(worker_count, config.beta)?)
            }
        };
        Ok(Self { kind, momentum })
    }

    pub fn kind(&self) -> &AggregatorKind {
        &self.kind
    }

    pub fn momentum(&self) -> Option<&MomentumState> {
        self.momentum.as_ref()
    }

    pub fn aggregate(
        &mut self,
        grads: &GradientSet,
        bus: &mut CollectiveBus,
    ) -> Result<Aggregate, AggregationError> {
        match (&self.kind, &mut self.momentum) {
            (AggregatorKind::Average, _) => Ok(Aggregate {
                direction: aggregate_average(grads, bus)?,
                coefficients: None,
            }),
            (AggregatorKind::AdaCons(config), Some(state)) => {
                let (direction, coefficients) = aggregate_adacons(grads, state, config, bus)?;
                Ok(Aggregate {
                    direction,
                    coefficients: Some(coefficients),
                })
            }
            (AggregatorKind::AdaCons(_), None) => unreachable!("momentum state built in new"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set<G: AsRef<[f64]>>(gs: &[G]) -> GradientSet {
        GradientSet::new(gs.iter().map(|g| g.as_ref().to_vec()).collect()).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    fn no_momentum() -> AdaConsConfig {
        AdaConsConfig {
            use_momentum: false,
            ..Default::default()
        }
    }

    #[test]
    fn gradient_set_validation() {
        assert_eq!(GradientSet::new(vec![]), Err(AggregationError::Empty));
        assert_eq!(GradientSet::new(vec![vec![]]), Err(AggregationError::Empty));
        assert_eq!(
            GradientSet::new(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(AggregationError::Dimension {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            GradientSet::new(vec![vec![1.0], vec![f64::NAN]]),
            Err(AggregationError::NonFinite {
                worker: 1,
                index: 0
            })
        );
    }

    #[test]
    fn mean_gradient_examples() {
        let mut bus = CollectiveBus::new(2).unwrap();
        assert_eq!(
            mean_gradient(&set(&[&[1.0, 0.0], &[0.0, 1.0]]), &mut bus).unwrap(),
            vec![0.5, 0.5]
        );
        let mut bus = CollectiveBus::new(1).unwrap();
        assert_eq!(
            mean_gradient(&set(&[&[3.0, -3.0]]), &mut bus).unwrap(),
            vec![3.0, -3.0]
        );
        let mut bus = CollectiveBus::new(2).unwrap();
        assert_eq!(
            mean_gradient(&set(&[&[2.0, 2.0], &[-2.0, -2.0]]), &mut bus).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn average_examples() {
        let mut bus = CollectiveBus::new(3).unwrap();
        let g = set(&[&[2.0, 0.0], &[0.0, 4.0], &[1.0, 2.0]]);
        assert_eq!(aggregate_average(&g, &mut bus).unwrap(), vec![1.0, 2.0]);
        let mut bus = CollectiveBus::new(3).unwrap();
        let g = set(&[&[0.5, -1.5]; 3]);
        assert_eq!(aggregate_average(&g, &mut bus).unwrap(), vec![0.5, -1.5]);
        assert_eq!(bus.ledger().allreduce_calls, 1);
        assert_eq!(bus.ledger().allgather_calls, 0);
    }

    #[test]
    fn raw_coefficient_examples() {
        let g = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_close(
            &raw_coefficients(&g, &[0.5, 0.5], 1e-12).unwrap(),
            &[0.5, 0.5],
            1e-15,
        );

        let g = set(&[&[1.0, 1.0], &[1.0, 0.0]]);
        assert_close(
            &raw_coefficients(&g, &[1.0, 0.5], 1e-12).unwrap(),
            &[1.5 / 2f64.sqrt(), 1.0],
            1e-15,
        );

        let g = set(&[&[0.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(
            raw_coefficients(&g, &[0.0, 1.0], 1e-12).unwrap(),
            vec![0.0, 1.0]
        );

        assert!(raw_coefficients(&g, &[0.0], 1e-12).is_err());
    }

    #[test]
    fn normalization_examples() {
        let g = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let n = normalize_unbiased(&[0.5, 0.5], &g, 1e-12).unwrap();
        assert_close(&n.gamma, &[0.5, 0.5], 1e-15);
        assert!((n.lambda - 1.0).abs() < 1e-15);
        assert!(!n.fallback);

        let g = set(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let n = normalize_unbiased(&[1.5 / 2f64.sqrt(), 1.0], &g, 1e-12).unwrap();
        assert!((n.lambda - 1.0 / 1.75).abs() < 1e-15);
        assert_close(&n.gamma, &[0.75 / 1.75, 1.0 / 1.75], 1e-15);

        let g = set(&[&[0.3, -0.2, 0.9]; 4]);
        let raw = raw_coefficients(&g, &[0.3, -0.2, 0.9], 1e-12).unwrap();
        let n = normalize_unbiased(&raw, &g, 1e-12).unwrap();
        assert_close(&n.gamma, &[0.25; 4], 1e-15);
    }

    #[test]
    fn normalization_falls_back_on_non_positive_sum() {
        let g = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let n = normalize_unbiased(&[-0.5, 0.2], &g, 1e-12).unwrap();
        assert!(n.fallback);
        assert_eq!(n.gamma, vec![0.5, 0.5]);
        let n = normalize_unbiased(&[0.0, 0.0], &g, 1e-12).unwrap();
        assert!(n.fallback);
        let n = normalize_unbiased(&[1e-14, 0.0], &g, 1e-12).unwrap();
        assert!(n.fallback);
    }

    #[test]
    fn unsquared_form_differs_unless_unit_norms() {
        let g = set(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let smoothed = [1.5 / 2f64.sqrt(), 1.0];
        let n = normalize_with(&smoothed, &g, 1e-12, NormalizationForm::UnsquaredNorm).unwrap();
        let sum: f64 = n.gamma.iter().sum();
        assert!((sum - 1.0).abs() > 1e-3);

        let g = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let n = normalize_with(&[0.5, 0.5], &g, 1e-12, NormalizationForm::UnsquaredNorm).unwrap();
        assert_close(&n.gamma, &[0.5, 0.5], 1e-15);
    }

    #[test]
    fn adacons_two_worker_example() {
        let g = set(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let mut bus = CollectiveBus::new(2).unwrap();
        let mut state = MomentumState::new(2, 0.99).unwrap();
        let (dir, coeffs) = aggregate_adacons(&g, &mut state, &no_momentum(), &mut bus).unwrap();
        assert_close(&dir, &[1.0, 0.75 / 1.75], 1e-15);
        assert_close(&coeffs.normalized, &[0.75 / 1.75, 1.0 / 1.75], 1e-15);
        assert_eq!(coeffs.raw, coeffs.smoothed);
        assert!(!state.is_initialized());
    }

    #[test]
    fn adacons_collapses_to_average() {
        let g0 = [0.7, -1.3, 2.2, 0.1];
        let g = set(&[&g0; 5]);
        let mut bus = CollectiveBus::new(5).unwrap();
        let mut state = MomentumState::new(5, 0.99).unwrap();
        let (dir, _) =
            aggregate_adacons(&g, &mut state, &AdaConsConfig::default(), &mut bus).unwrap();
        assert_close(&dir, &g0, 1e-12);
    }

    #[test]
    fn adacons_single_worker() {
        let g = set(&[&[3.0, -1.0, 0.25]]);
        let mut bus = CollectiveBus::new(1).unwrap();
        let mut state = MomentumState::new(1, 0.99).unwrap();
        let (dir, coeffs) =
            aggregate_adacons(&g, &mut state, &AdaConsConfig::default(), &mut bus).unwrap();
        assert_eq!(coeffs.normalized, vec![1.0]);
        assert_close(&dir, &[3.0, -1.0, 0.25], 1e-15);
    }

    #[test]
    fn adacons_ledger_per_round() {
        let g = set(&[&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]]);
        let mut bus = CollectiveBus::new(2).unwrap();
        let mut state = MomentumState::new(2, 0.5).unwrap();
        aggregate_adacons(&g, &mut state, &AdaConsConfig::default(), &mut bus).unwrap();
        let l = bus.ledger();
        assert_eq!((l.allreduce_calls, l.payload_elements), (2, 6));
        assert_eq!((l.allgather_calls, l.gather_elements), (1, 2));
    }

    #[test]
    fn raw_variant_uses_fallback_lambda() {
        let g = set(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let mut bus = CollectiveBus::new(2).unwrap();
        let mut state = MomentumState::new(2, 0.5).unwrap();
        let config = AdaConsConfig::default().for_variant(AdaConsVariant::Raw);
        let (dir, coeffs) = aggregate_adacons(&g, &mut state, &config, &mut bus).unwrap();
        // u = (0.75, 1.0), lambda = 1
        assert_close(&coeffs.normalized, &[0.75, 1.0], 1e-15);
        assert_close(&dir, &[1.75, 0.75], 1e-15);
        assert_eq!(coeffs.lambda, 1.0);
    }

    #[test]
    fn mismatched_bus_is_rejected() {
        let g = set(&[&[1.0], &[2.0]]);
        let mut bus = CollectiveBus::new(3).unwrap();
        let mut state = MomentumState::new(2, 0.5).unwrap();
        let err = aggregate_adacons(&g, &mut state, &AdaConsConfig::default(), &mut bus);
        assert!(matches!(err, Err(AggregationError::Collective(_))));
    }

    #[test]
    fn config_validation() {
        let bad = AdaConsConfig {
            beta: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AdaConsConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(Aggregator::new(AggregatorKind::AdaCons(bad), 2).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(AggregatorKind::Average.label(), "sum");
        for v in AdaConsVariant::ALL {
            let kind = AggregatorKind::AdaCons(AdaConsConfig::default().for_variant(v));
            assert_eq!(kind.label(), v.label());
        }
    }
}
