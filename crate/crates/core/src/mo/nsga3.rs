use rand::Rng;

use super::{check_uniform_dim, non_dominated_sort, ObjectiveVector, WeightVectorSet};
use crate::error::{NemoError, Result};

const RANGE_FLOOR: f64 = 1e-12;

/// Closest reference direction for a normalized point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub reference: usize,
    pub distance: f64,
}

/// Translate by the ideal point and scale by the per-objective range of the
/// whole candidate pool.
fn normalize(points: &[ObjectiveVector], k: usize) -> Vec<Vec<f64>> {
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for p in points {
        for (i, v) in p.values().iter().enumerate() {
            lo[i] = lo[i].min(*v);
            hi[i] = hi[i].max(*v);
        }
    }
    points
        .iter()
        .map(|p| {
            p.values()
                .iter()
                .enumerate()
                .map(|(i, v)| (v - lo[i]) / (hi[i] - lo[i]).max(RANGE_FLOOR))
                .collect()
        })
        .collect()
}

fn associate(point: &[f64], refs: &WeightVectorSet) -> Association {
    let mut best = Association { reference: 0, distance: f64::INFINITY };
    for (j, w) in refs.vectors.iter().enumerate() {
        let ww: f64 = w.iter().map(|x| x * x).sum();
        let t = if ww > 0.0 {
            point.iter().zip(w).map(|(p, x)| p * x).sum::<f64>() / ww
        } else {
            0.0
        };
        let d2: f64 = point.iter().zip(w).map(|(p, x)| (p - t * x).powi(2)).sum();
        let d = d2.sqrt();
        if d < best.distance {
            best = Association { reference: j, distance: d };
        }
    }
    best
}

/// Picks members of `front` one at a time, always from the least crowded
/// reference direction that still has candidates, until `take` are chosen.
fn niche_fill<R: Rng + ?Sized>(
    front: &[usize],
    take: usize,
    assoc: &[Association],
    niche_count: &mut [usize],
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); niche_count.len()];
    for &i in front {
        pools[assoc[i].reference].push(i);
    }
    for _ in 0..take.min(front.len()) {
        let min_count = pools
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(j, _)| niche_count[j])
            .min()
            .expect("front still has members");
        let candidates: Vec<usize> = (0..pools.len())
            .filter(|&j| !pools[j].is_empty() && niche_count[j] == min_count)
            .collect();
        let j = candidates[rng.random_range(0..candidates.len())];

        let pos = if niche_count[j] == 0 {
            let members = &pools[j];
            (0..members.len())
                .min_by(|&a, &b| {
                    assoc[members[a]]
                        .distance
                        .total_cmp(&assoc[members[b]].distance)
                        .then(a.cmp(&b))
                })
                .unwrap()
        } else {
            rng.random_range(0..pools[j].len())
        };
        out.push(pools[j].remove(pos));
        niche_count[j] += 1;
    }
}

fn prepare(points: &[ObjectiveVector], refs: &WeightVectorSet) -> Result<Vec<Association>> {
    let k = check_uniform_dim(points)?;
    if refs.dim() != k {
        return Err(NemoError::DimensionMismatch { expected: k, got: refs.dim() });
    }
    Ok(normalize(points, k).iter().map(|p| associate(p, refs)).collect())
}

/// Reference-point survivor selection: whole fronts in rank order, then
/// niche-balanced picks from the front that overflows.
pub fn nsga3_select<R: Rng + ?Sized>(
    candidates: &[ObjectiveVector],
    target_size: usize,
    refs: &WeightVectorSet,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if target_size > candidates.len() {
        return Err(NemoError::contract(format!(
            "cannot select {target_size} of {} candidates",
            candidates.len()
        )));
    }
    if target_size == 0 {
        return Ok(Vec::new());
    }
    let assoc = prepare(candidates, refs)?;
    let partition = non_dominated_sort(candidates)?;
    let mut niche_count = vec![0usize; refs.len()];
    let mut selected = Vec::with_capacity(target_size);

    for front in &partition.fronts {
        let room = target_size - selected.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            for &i in front {
                niche_count[assoc[i].reference] += 1;
                selected.push(i);
            }
        } else {
            niche_fill(front, room, &assoc, &mut niche_count, rng, &mut selected);
        }
    }
    Ok(selected)
}

/// Total survival order of all candidates: front by front, and inside each
/// front the order in which niching would pick its members given every
/// earlier front already selected. Any prefix is a valid selection.
pub fn nsga3_rank_order<R: Rng + ?Sized>(
    candidates: &[ObjectiveVector],
    refs: &WeightVectorSet,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let assoc = prepare(candidates, refs)?;
    let partition = non_dominated_sort(candidates)?;
    let mut niche_count = vec![0usize; refs.len()];
    let mut order = Vec::with_capacity(candidates.len());
    for front in &partition.fronts {
        niche_fill(front, front.len(), &assoc, &mut niche_count, rng, &mut order);
    }
    Ok(order)
}
