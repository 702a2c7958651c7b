use serde::{Deserialize, Serialize};

use super::{check_uniform_dim, dominates_slice, ObjectiveVector};
use crate::error::Result;

/// Ordered partition of point indices into non-dominated fronts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
    /// Front index of every input point (0 = non-dominated).
    pub rank: Vec<usize>,
}

impl FrontPartition {
    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }
}

/// Fast non-dominated sort. Indices inside each front are ascending, so the
/// result depends only on the input order.
pub fn non_dominated_sort(points: &[ObjectiveVector]) -> Result<FrontPartition> {
    check_uniform_dim(points)?;
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];

    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].values(), points[j].values());
            if dominates_slice(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_slice(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut rank = vec![0usize; n];
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = fronts.len();
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }

    Ok(FrontPartition { fronts, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::NemoError;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec()).unwrap()
    }

    /// Peel off the non-dominated set by brute force until nothing is left.
    fn brute_force_fronts(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..points.len()).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    !remaining.iter().any(|&j| {
                        let (a, b) = (points[j].values(), points[i].values());
                        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
                    })
                })
                .collect();
            remaining.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    #[test]
    fn small_examples() {
        let pts = vec![ov(&[1.0, 2.0]), ov(&[2.0, 1.0]), ov(&[3.0, 3.0])];
        let p = non_dominated_sort(&pts).unwrap();
        assert_eq!(p.fronts, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.rank, vec![0, 0, 1]);

        let p = non_dominated_sort(&[ov(&[1.0, 1.0])]).unwrap();
        assert_eq!(p.fronts, vec![vec![0]]);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(non_dominated_sort(&[]), Err(NemoError::EmptyInput(_))));
    }

    #[test]
    fn hundred_random_points_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<_> = (0..100)
            .map(|_| ov(&[rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]))
            .collect();
        let p = non_dominated_sort(&pts).unwrap();
        assert_eq!(p.fronts, brute_force_fronts(&pts));
    }

    fn point_set() -> impl Strategy<Value = Vec<ObjectiveVector>> {
        (2usize..=4).prop_flat_map(|k| {
            prop::collection::vec(
                prop::collection::vec((0u8..6).prop_map(|v| v as f64), k).prop_map(ObjectiveVector),
                1..=200,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn agrees_with_brute_force(pts in point_set()) {
            let p = non_dominated_sort(&pts).unwrap();
            prop_assert_eq!(&p.fronts, &brute_force_fronts(&pts));
            for (r, front) in p.fronts.iter().enumerate() {
                for &i in front {
                    prop_assert_eq!(p.rank[i], r);
                }
            }
        }
    }
}
