use serde::{Deserialize, Serialize};

use super::{check_uniform_dim, ObjectiveVector, WeightVectorSet};
use crate::error::{NemoError, Result};

/// The best conceivable objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtopianPoint(pub Vec<f64>);

impl UtopianPoint {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }
}

/// R2 indicator: the mean over weight vectors of the best weighted
/// Tchebycheff distance from the utopian point. Lower is better.
pub fn r2_indicator(
    front: &[ObjectiveVector],
    weights: &WeightVectorSet,
    utopia: &UtopianPoint,
) -> Result<f64> {
    let k = check_uniform_dim(front)?;
    if weights.dim() != k {
        return Err(NemoError::DimensionMismatch { expected: k, got: weights.dim() });
    }
    if utopia.0.len() != k {
        return Err(NemoError::DimensionMismatch { expected: k, got: utopia.0.len() });
    }
    if weights.is_empty() {
        return Err(NemoError::EmptyInput("weight set"));
    }

    let total: f64 = weights
        .vectors
        .iter()
        .map(|lambda| {
            front
                .iter()
                .map(|gamma| {
                    lambda
                        .iter()
                        .zip(gamma.values())
                        .zip(&utopia.0)
                        .map(|((l, g), z)| l * (z - g).abs())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / weights.len() as f64)
}
