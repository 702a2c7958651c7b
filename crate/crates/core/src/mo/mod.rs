//! Multi-objective primitives: Pareto dominance, non-dominated sorting,
//! simplex-lattice weight vectors, the R2 indicator, and reference-point
//! (NSGA-III style) survivor selection.
//!
//! Every objective is in minimization orientation.

mod nsga3;
mod r2;
mod sort;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{NemoError, Result};

pub use nsga3::{nsga3_rank_order, nsga3_select, Association};
pub use r2::{r2_indicator, UtopianPoint};
pub use sort::{non_dominated_sort, FrontPartition};
pub use weights::{uniform_weight_vectors, WeightVectorSet};

/// A point in k-dimensional minimization space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(NemoError::EmptyInput("objective vector"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(NemoError::contract(format!("non-finite objective value {v}")));
        }
        Ok(Self(values))
    }

    /// All-ones vector, the worst point of the unit objective cube.
    pub fn worst(k: usize) -> Self {
        Self(vec![1.0; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ObjectiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Pareto dominance: `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(NemoError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(dominates_slice(a.values(), b.values()))
}

#[inline]
pub fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

pub(crate) fn check_uniform_dim(points: &[ObjectiveVector]) -> Result<usize> {
    let k = points
        .first()
        .ok_or(NemoError::EmptyInput("objective set"))?
        .dim();
    for p in points {
        if p.dim() != k {
            return Err(NemoError::DimensionMismatch {
                expected: k,
                got: p.dim(),
            });
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&ov(&[0.1, 0.2]), &ov(&[0.2, 0.3])).unwrap());
        assert!(!dominates(&ov(&[0.1, 0.2]), &ov(&[0.1, 0.2])).unwrap());
        // trade-off pair: better in f1, worse in f2
        assert!(!dominates(&ov(&[0.1, 0.5]), &ov(&[0.2, 0.3])).unwrap());
        assert!(!dominates(&ov(&[0.2, 0.3]), &ov(&[0.1, 0.5])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = dominates(&ov(&[0.1, 0.2]), &ov(&[0.1, 0.2, 0.3])).unwrap_err();
        assert!(matches!(err, NemoError::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ObjectiveVector::new(vec![0.1, f64::NAN]).is_err());
        assert!(ObjectiveVector::new(vec![]).is_err());
    }

    fn vec3() -> impl Strategy<Value = ObjectiveVector> {
        // coarse grid so ties and equal coordinates actually occur
        prop::collection::vec((0u8..5).prop_map(|v| v as f64 / 4.0), 3).prop_map(ObjectiveVector)
    }

    proptest! {
        #[test]
        fn irreflexive(a in vec3()) {
            prop_assert!(!dominates(&a, &a).unwrap());
        }

        #[test]
        fn antisymmetric(a in vec3(), b in vec3()) {
            prop_assert!(!(dominates(&a, &b).unwrap() && dominates(&b, &a).unwrap()));
        }

        #[test]
        fn transitive(a in vec3(), b in vec3(), c in vec3()) {
            if dominates(&a, &b).unwrap() && dominates(&b, &c).unwrap() {
                prop_assert!(dominates(&a, &c).unwrap());
            }
        }
    }
}
