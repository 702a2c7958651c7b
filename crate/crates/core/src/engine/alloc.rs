use serde::{Deserialize, Serialize};

use crate::error::{NemoError, Result};
use crate::mo::{r2_indicator, ObjectiveVector, UtopianPoint, WeightVectorSet};

/// Per-species bookkeeping for the bandit allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesStats {
    /// Normalized utility, 1 = best species this generation.
    pub utility: f64,
    pub raw_r2: f64,
    /// Cumulative evaluations requested by this species.
    pub eval_count: u64,
    pub ucb_score: f64,
    pub allocation: usize,
}

impl SpeciesStats {
    pub fn new(allocation: usize) -> Self {
        Self { utility: 0.5, raw_r2: f64::NAN, eval_count: 0, ucb_score: 0.0, allocation }
    }
}

/// R2 of each species' own objective set, min-max normalized so the lowest
/// R2 maps to utility 1 and the highest to 0. Empty sets get the worst
/// utility; if every R2 is equal all utilities are 0.5.
pub fn species_utility(
    sets: &[Vec<ObjectiveVector>],
    weights: &WeightVectorSet,
    utopia: &UtopianPoint,
) -> Result<Vec<(f64, f64)>> {
    let raws: Vec<Option<f64>> = sets
        .iter()
        .map(|s| if s.is_empty() { Ok(None) } else { r2_indicator(s, weights, utopia).map(Some) })
        .collect::<Result<_>>()?;
    let present: Vec<f64> = raws.iter().flatten().copied().collect();
    if present.is_empty() {
        return Ok(raws.iter().map(|_| (f64::INFINITY, 0.0)).collect());
    }
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(raws
        .into_iter()
        .map(|r| match r {
            None => (f64::INFINITY, 0.0),
            Some(r) if hi == lo => (r, 0.5),
            Some(r) => (r, (hi - r) / (hi - lo + 1e-12)),
        })
        .collect())
}

/// Upper confidence bound `u_s + c * sqrt(ln(sum y) / y_s)`; a zero count is
/// treated as one.
pub fn ucb_scores(stats: &[SpeciesStats], c: f64) -> Vec<f64> {
    let counts: Vec<f64> = stats.iter().map(|s| s.eval_count.max(1) as f64).collect();
    let total: f64 = counts.iter().sum();
    let log_total = total.ln().max(0.0);
    stats
        .iter()
        .zip(&counts)
        .map(|(s, y)| s.utility + c * (log_total / y).sqrt())
        .collect()
}

/// Proportional split of `population_size` by score with a floor of
/// `min_size`, repaired to the exact total. Excess is removed from the
/// largest allocation and shortfall added to the smallest, lowest index
/// first on ties.
pub fn allocate_sizes(scores: &[f64], population_size: usize, min_size: usize) -> Result<Vec<usize>> {
    let n = scores.len();
    if n == 0 {
        return Err(NemoError::contract("no species to allocate"));
    }
    if min_size == 0 || population_size < n * min_size {
        return Err(NemoError::contract(format!(
            "population {population_size} cannot hold {n} species of at least {min_size}"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(NemoError::contract("non-finite allocation score"));
    }
    // UCB scores are non-negative already; shift only if a caller passes negatives
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if lo < 0.0 { -lo } else { 0.0 };
    let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
    let total: f64 = shifted.iter().sum();

    let mut alloc: Vec<usize> = shifted
        .iter()
        .map(|s| {
            let share = if total > 0.0 { s / total } else { 1.0 / n as f64 };
            ((population_size as f64 * share).round_ties_even() as usize).max(min_size)
        })
        .collect();

    let mut sum: usize = alloc.iter().sum();
    while sum > population_size {
        let i = argmax_first(&alloc);
        alloc[i] -= 1;
        sum -= 1;
    }
    while sum < population_size {
        let i = argmin_first(&alloc);
        alloc[i] += 1;
        sum += 1;
    }
    Ok(alloc)
}

fn argmax_first(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin_first(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mo::uniform_weight_vectors;
    use proptest::prelude::*;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn utopia_member_has_full_utility() {
        let w = uniform_weight_vectors(3, 25).unwrap();
        let z = UtopianPoint::zeros(3);
        let sets = vec![vec![ov(&[0.0, 0.0, 0.0]), ov(&[0.5, 0.5, 0.5])], vec![ov(&[0.4, 0.4, 0.4])]];
        let u = species_utility(&sets, &w, &z).unwrap();
        assert_eq!(u[0].0, 0.0);
        assert!((u[0].1 - 1.0).abs() < 1e-9);
        assert_eq!(u[1].1, 0.0);
    }

    #[test]
    fn identical_sets_tie_at_half() {
        let w = uniform_weight_vectors(3, 25).unwrap();
        let set = vec![ov(&[0.2, 0.3, 0.4])];
        let u = species_utility(&[set.clone(), set], &w, &UtopianPoint::zeros(3)).unwrap();
        assert_eq!(u[0].1, 0.5);
        assert_eq!(u[1].1, 0.5);
    }

    #[test]
    fn min_max_normalization() {
        // single-weight set makes raw R2 equal to the chosen coordinate
        let w = WeightVectorSet::from_vectors(vec![vec![1.0, 0.0]]).unwrap();
        let sets: Vec<Vec<ObjectiveVector>> =
            [0.2, 0.4, 0.6].iter().map(|v| vec![ov(&[*v, 0.0])]).collect();
        let u = species_utility(&sets, &w, &UtopianPoint::zeros(2)).unwrap();
        for ((raw, util), (er, eu)) in u.iter().zip([(0.2, 1.0), (0.4, 0.5), (0.6, 0.0)]) {
            assert!((raw - er).abs() < 1e-12);
            assert!((util - eu).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_set_is_worst() {
        let w = uniform_weight_vectors(2, 3).unwrap();
        let u = species_utility(&[vec![ov(&[0.5, 0.5])], vec![]], &w, &UtopianPoint::zeros(2)).unwrap();
        assert_eq!(u[1].1, 0.0);
    }

    fn stats(u: f64, y: u64) -> SpeciesStats {
        SpeciesStats { utility: u, eval_count: y, ..SpeciesStats::new(1) }
    }

    #[test]
    fn ucb_worked_example() {
        // y = 4 out of 16 total
        let s = vec![stats(0.5, 4), stats(0.0, 12)];
        let scores = ucb_scores(&s, 0.9);
        let expected = 0.5 + 0.9 * (16f64.ln() / 4.0).sqrt();
        assert!((scores[0] - expected).abs() < 1e-12);
        assert!((scores[0] - 1.2493).abs() < 1e-4);
    }

    #[test]
    fn ucb_without_exploration_is_utility() {
        let s = vec![stats(0.3, 5), stats(0.7, 9)];
        assert_eq!(ucb_scores(&s, 0.0), vec![0.3, 0.7]);
    }

    #[test]
    fn ucb_favours_less_evaluated() {
        let s = vec![stats(0.5, 3), stats(0.5, 30)];
        let sc = ucb_scores(&s, 0.9);
        assert!(sc[0] > sc[1]);
        // zero counts bootstrap as one
        let sc = ucb_scores(&[stats(0.5, 0), stats(0.5, 0)], 0.9);
        assert!(sc.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(allocate_sizes(&[1.0; 4], 50, 5).unwrap(), vec![13, 13, 12, 12]);
        assert_eq!(allocate_sizes(&[0.0; 4], 50, 5).unwrap(), vec![13, 13, 12, 12]);
        assert_eq!(allocate_sizes(&[0.7], 50, 5).unwrap(), vec![50]);
        assert_eq!(allocate_sizes(&[10.0, 0.0, 0.0, 0.0], 50, 5).unwrap(), vec![35, 5, 5, 5]);
    }

    #[test]
    fn allocation_precondition() {
        assert!(allocate_sizes(&[1.0; 4], 19, 5).is_err());
        assert!(allocate_sizes(&[], 10, 1).is_err());
        assert!(allocate_sizes(&[f64::NAN, 1.0], 10, 1).is_err());
    }

    proptest! {
        #[test]
        fn allocation_sums_and_floors(
            scores in prop::collection::vec(-2.0f64..5.0, 1..8),
            extra in 0usize..60,
            min in 1usize..6,
        ) {
            let pop = scores.len() * min + extra;
            let a = allocate_sizes(&scores, pop, min).unwrap();
            prop_assert_eq!(a.iter().sum::<usize>(), pop);
            prop_assert!(a.iter().all(|x| *x >= min));
        }
    }
}
