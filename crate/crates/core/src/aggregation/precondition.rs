use super::{AggregationError, GradientSet};
use crate::linalg::{axpy, dot};

/// Applies `G = lambda * sum_i g_i g_iᵀ / |g_i|²` to `vector`.
///
/// This is the preconditioner through which consensus weighting acts on the
/// mean gradient. It is never materialized; each column contributes a
/// rank-one projection and zero columns contribute nothing. Analysis only,
/// the training path does not call it.
pub fn preconditioner_apply(
    grads: &GradientSet,
    vector: &[f64],
    lambda: f64,
) -> Result<Vec<f64>, AggregationError> {
    if vector.len() != grads.dimension() {
        return Err(AggregationError::Dimension {
            expected: grads.dimension(),
            got: vector.len(),
        });
    }
    let mut out = vec![0.0; vector.len()];
    for (g, &n) in grads.directions().iter().zip(grads.norms()) {
        if n == 0.0 {
            continue;
        }
        axpy(lambda * dot(g, vector) / (n * n), g, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_columns_give_identity() {
        let g = GradientSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            preconditioner_apply(&g, &[3.0, 4.0], 1.0).unwrap(),
            vec![3.0, 4.0]
        );
    }

    #[test]
    fn single_column_projects() {
        let g = GradientSet::new(vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            preconditioner_apply(&g, &[3.0, 4.0], 1.0).unwrap(),
            vec![3.0, 0.0]
        );
        let g = GradientSet::new(vec![vec![1.0, 1.0]]).unwrap();
        let out = preconditioner_apply(&g, &[1.0, 0.0], 1.0).unwrap();
        assert!((out[0] - 0.5).abs() < 1e-15 && (out[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_columns_are_skipped() {
        let g = GradientSet::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(
            preconditioner_apply(&g, &[3.0, 4.0], 2.0).unwrap(),
            vec![6.0, 0.0]
        );
    }

    #[test]
    fn rejects_wrong_length() {
        let g = GradientSet::new(vec![vec![1.0, 0.0]]).unwrap();
        assert!(preconditioner_apply(&g, &[1.0], 1.0).is_err());
    }
}
