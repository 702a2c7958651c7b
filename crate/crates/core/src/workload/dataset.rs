use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{NemoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Calibration,
    Evaluation,
    Validation,
}

/// Row-major samples with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<f64>,
    pub labels: Vec<usize>,
    pub dim: usize,
    pub num_classes: usize,
    pub split: Split,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Seeded Gaussian-blob generator; equal settings always yield the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub seed: u64,
    pub input_dim: usize,
    pub num_classes: usize,
    /// Class `c` is centred `separation` along axis `c mod input_dim`.
    pub separation: f64,
    /// Seeded Gaussian offset added to every centre coordinate.
    pub center_jitter: f64,
    /// Within-class noise standard deviation.
    pub noise: f64,
    /// Per-class sample counts: train, calibration, evaluation, validation.
    pub per_class: [usize; 4],
}

impl DatasetSpec {
    /// 4 classes in 8 dimensions; 2000 / 256 / 200 / 800 samples.
    pub fn blobs(seed: u64) -> Self {
        Self {
            seed,
            input_dim: 8,
            num_classes: 4,
            separation: 3.0,
            center_jitter: 0.3,
            noise: 1.0,
            per_class: [500, 64, 50, 200],
        }
    }

    pub fn generate(&self) -> Result<DatasetSplits> {
        if self.input_dim == 0 || self.num_classes < 2 {
            return Err(NemoError::config("dataset needs input_dim >= 1 and at least 2 classes"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let jitter = Normal::new(0.0, self.center_jitter)
            .map_err(|e| NemoError::config(format!("center_jitter: {e}")))?;
        let noise = Normal::new(0.0, self.noise).map_err(|e| NemoError::config(format!("noise: {e}")))?;
        let means: Vec<Vec<f64>> = (0..self.num_classes)
            .map(|c| {
                (0..self.input_dim)
                    .map(|d| jitter.sample(&mut rng) + if d == c % self.input_dim { self.separation } else { 0.0 })
                    .collect()
            })
            .collect();

        let splits = [Split::Train, Split::Calibration, Split::Evaluation, Split::Validation];
        let mut out = Vec::with_capacity(4);
        for (split, &count) in splits.iter().zip(&self.per_class) {
            let mut order: Vec<usize> = (0..self.num_classes).flat_map(|c| std::iter::repeat_n(c, count)).collect();
            // interleave classes so prefixes (calibration batches) are mixed
            order.shuffle(&mut rng);
            let mut inputs = Vec::with_capacity(order.len() * self.input_dim);
            for &c in &order {
                inputs.extend(means[c].iter().map(|m| m + noise.sample(&mut rng)));
            }
            out.push(Dataset {
                inputs,
                labels: order,
                dim: self.input_dim,
                num_classes: self.num_classes,
                split: *split,
            });
        }
        let mut it = out.into_iter();
        Ok(DatasetSplits {
            train: it.next().unwrap(),
            calibration: it.next().unwrap(),
            evaluation: it.next().unwrap(),
            validation: it.next().unwrap(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplits {
    pub train: Dataset,
    pub calibration: Dataset,
    /// Class-balanced subset used for fitness evaluation during search.
    pub evaluation: Dataset,
    pub validation: Dataset,
}

impl DatasetSplits {
    pub fn get(&self, split: Split) -> &Dataset {
        match split {
            Split::Train => &self.train,
            Split::Calibration => &self.calibration,
            Split::Evaluation => &self.evaluation,
            Split::Validation => &self.validation,
        }
    }
}
