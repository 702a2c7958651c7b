use serde::{Deserialize, Serialize};

use crate::error::{NemoError, Result};

/// Uniformly spread weight vectors on the unit simplex. Used both as the R2
/// weight set and as the reference directions for niching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVectorSet {
    pub vectors: Vec<Vec<f64>>,
    /// Number of simplex divisions that produced the lattice.
    pub divisions: usize,
}

impl WeightVectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// Builds a set from explicit vectors (e.g. hand-picked test weights).
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let k = vectors.first().ok_or(NemoError::EmptyInput("weight set"))?.len();
        for v in &vectors {
            if v.len() != k {
                return Err(NemoError::DimensionMismatch { expected: k, got: v.len() });
            }
            if v.iter().any(|w| *w < 0.0 || !w.is_finite()) {
                return Err(NemoError::contract("weights must be finite and non-negative"));
            }
        }
        Ok(Self { vectors, divisions: 0 })
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Das-Dennis simplex lattice with the smallest division count whose size
/// reaches `target_count`.
pub fn uniform_weight_vectors(k: usize, target_count: usize) -> Result<WeightVectorSet> {
    if k < 2 {
        return Err(NemoError::contract(format!("need at least 2 objectives, got {k}")));
    }
    if target_count < k {
        return Err(NemoError::contract(format!(
            "target count {target_count} is below the objective count {k}"
        )));
    }
    let mut h = 1;
    while binomial(h + k - 1, k - 1) < target_count {
        h += 1;
    }

    let mut vectors = Vec::with_capacity(binomial(h + k - 1, k - 1));
    let mut counts = vec![0usize; k];
    lattice(&mut vectors, &mut counts, 0, h, h);
    Ok(WeightVectorSet { vectors, divisions: h })
}

fn lattice(out: &mut Vec<Vec<f64>>, counts: &mut [usize], pos: usize, left: usize, h: usize) {
    if pos == counts.len() - 1 {
        counts[pos] = left;
        out.push(counts.iter().map(|&c| c as f64 / h as f64).collect());
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        lattice(out, counts, pos + 1, left - c, h);
    }
}
