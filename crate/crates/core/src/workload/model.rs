use log::info;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DatasetSpec, DatasetSplits};
use super::quant::Quantizer;
use crate::bits::BitConfig;
use crate::error::{NemoError, Result};

/// Operation vocabulary for node features. Only dense layers execute today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpType {
    Linear,
}

impl OpType {
    pub const ALL: [OpType; 1] = [OpType::Linear];

    pub fn index(self) -> usize {
        match self {
            OpType::Linear => 0,
        }
    }
}

/// Fully connected layer; `weights` is `out_dim x in_dim`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub op_type: OpType,
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub group_id: usize,
}

impl DenseLayer {
    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn macs(&self) -> usize {
        self.in_dim * self.out_dim
    }

    fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(NemoError::config("layer dimensions must be positive"));
        }
        if self.weights.len() != self.in_dim * self.out_dim {
            return Err(NemoError::DimensionMismatch { expected: self.in_dim * self.out_dim, got: self.weights.len() });
        }
        if self.bias.len() != self.out_dim {
            return Err(NemoError::DimensionMismatch { expected: self.out_dim, got: self.bias.len() });
        }
        if self.weights.iter().chain(&self.bias).any(|v| !v.is_finite()) {
            return Err(NemoError::config("non-finite layer parameter"));
        }
        Ok(())
    }

    fn weight_range(&self) -> (f64, f64) {
        let lo = self.weights.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        widen(lo, hi)
    }

    fn apply(&self, weights: &[f64], x: &[f64], out: &mut Vec<f64>, relu: bool) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut z = self.bias[o];
            for (w, v) in row.iter().zip(x) {
                z += w * v;
            }
            out.push(if relu { z.max(0.0) } else { z });
        }
    }
}

const DEGENERATE_WIDEN: f64 = 1e-6;

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - DEGENERATE_WIDEN, hi + DEGENERATE_WIDEN)
    }
}

/// A trained network whose weight and input-activation tensors are the
/// quantizer nodes. Quantizer `2l` is layer `l`'s weight, `2l + 1` its input.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub name: String,
    layers: Vec<DenseLayer>,
    dataset: DatasetSpec,
    calibration: Option<Vec<(f64, f64)>>,
}

impl Workload {
    pub fn new(name: impl Into<String>, layers: Vec<DenseLayer>, dataset: DatasetSpec) -> Result<Self> {
        if layers.is_empty() {
            return Err(NemoError::config("workload has no layers"));
        }
        for l in &layers {
            l.validate()?;
        }
        for w in layers.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(NemoError::DimensionMismatch { expected: w[0].out_dim, got: w[1].in_dim });
            }
        }
        if layers[0].in_dim != dataset.input_dim || layers.last().unwrap().out_dim != dataset.num_classes {
            return Err(NemoError::config("layer shapes do not match the dataset"));
        }
        Ok(Self { name: name.into(), layers, dataset, calibration: None })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn dataset_spec(&self) -> &DatasetSpec {
        &self.dataset
    }

    pub fn num_quantizers(&self) -> usize {
        2 * self.layers.len()
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn param_counts(&self) -> Vec<usize> {
        self.layers.iter().map(DenseLayer::param_count).collect()
    }

    pub fn mac_counts(&self) -> Vec<usize> {
        self.layers.iter().map(DenseLayer::macs).collect()
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibration.is_some()
    }

    pub fn calibration(&self) -> Option<&[(f64, f64)]> {
        self.calibration.as_deref()
    }

    /// Full-precision class scores.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.apply(&layer.weights, &cur, &mut next, l != last);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Quantizer ranges: weights use their static min/max; each layer input
    /// uses the mean over `n_batches` batches of the per-batch min and max.
    pub fn calibrate(&mut self, data: &Dataset, n_batches: usize, batch_size: usize) -> Result<()> {
        if data.is_empty() {
            return Err(NemoError::EmptyInput("calibration data"));
        }
        if n_batches == 0 || batch_size == 0 {
            return Err(NemoError::config("calibration needs at least one non-empty batch"));
        }
        let nl = self.layers.len();
        let mut min_sum = vec![0.0; nl];
        let mut max_sum = vec![0.0; nl];
        let mut batches = 0usize;
        for b in 0..n_batches {
            let start = b * batch_size;
            if start >= data.len() {
                break;
            }
            let end = (start + batch_size).min(data.len());
            let mut lo = vec![f64::INFINITY; nl];
            let mut hi = vec![f64::NEG_INFINITY; nl];
            for i in start..end {
                let mut cur = data.sample(i).to_vec();
                let mut next = Vec::new();
                for (l, layer) in self.layers.iter().enumerate() {
                    for v in &cur {
                        lo[l] = lo[l].min(*v);
                        hi[l] = hi[l].max(*v);
                    }
                    layer.apply(&layer.weights, &cur, &mut next, l + 1 != nl);
                    std::mem::swap(&mut cur, &mut next);
                }
            }
            for l in 0..nl {
                min_sum[l] += lo[l];
                max_sum[l] += hi[l];
            }
            batches += 1;
        }
        let mut ranges = Vec::with_capacity(2 * nl);
        for (l, layer) in self.layers.iter().enumerate() {
            ranges.push(layer.weight_range());
            ranges.push(widen(min_sum[l] / batches as f64, max_sum[l] / batches as f64));
        }
        self.calibration = Some(ranges);
        Ok(())
    }

    /// Overrides calibration ranges (e.g. loaded from elsewhere).
    pub fn set_calibration(&mut self, ranges: Vec<(f64, f64)>) -> Result<()> {
        if ranges.len() != self.num_quantizers() {
            return Err(NemoError::DimensionMismatch { expected: self.num_quantizers(), got: ranges.len() });
        }
        if ranges.iter().any(|(a, b)| a.partial_cmp(b) != Some(std::cmp::Ordering::Less)) {
            return Err(NemoError::config("calibration ranges need x_min < x_max"));
        }
        self.calibration = Some(ranges);
        Ok(())
    }

    fn quantizers(&self, config: &BitConfig) -> Result<Vec<Quantizer>> {
        let ranges = self.calibration.as_ref().ok_or(NemoError::Uncalibrated)?;
        if config.len() != self.num_quantizers() {
            return Err(NemoError::DimensionMismatch { expected: self.num_quantizers(), got: config.len() });
        }
        config
            .as_slice()
            .iter()
            .zip(ranges)
            .map(|(&b, &(lo, hi))| Quantizer::new(b, lo, hi))
            .collect()
    }

    /// Simulated quantization: every weight tensor and every layer input is
    /// fake-quantized before the (full-precision) layer arithmetic. Returns
    /// class scores per sample, row-major.
    pub fn quantized_forward(&self, config: &BitConfig, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        let qs = self.quantizers(config)?;
        let qweights: Vec<Vec<f64>> = self
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| layer.weights.iter().map(|&w| qs[2 * l].fake_quantize(w)).collect())
            .collect();
        let last = self.layers.len() - 1;
        let mut out = Vec::with_capacity(data.len());
        let mut cur = Vec::new();
        let mut next = Vec::new();
        for i in 0..data.len() {
            cur.clear();
            cur.extend_from_slice(data.sample(i));
            for (l, layer) in self.layers.iter().enumerate() {
                for v in cur.iter_mut() {
                    *v = qs[2 * l + 1].fake_quantize(*v);
                }
                layer.apply(&qweights[l], &cur, &mut next, l != last);
                std::mem::swap(&mut cur, &mut next);
            }
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Layer widths of a bundled reference classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceArch {
    pub name: String,
    /// `dims[0]` inputs through `dims.last()` classes.
    pub dims: Vec<usize>,
    /// Consecutive layers sharing a group id.
    pub group_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl ReferenceArch {
    /// Two dense layers, 8 -> 16 -> 4 (4 quantizers).
    pub fn tiny() -> Self {
        Self { name: "tiny".into(), dims: vec![8, 16, 4], group_size: 1, learning_rate: 0.05, epochs: 30 }
    }

    /// Eight dense layers, 8 -> 32 x 7 -> 4 (16 quantizers).
    pub fn small() -> Self {
        Self {
            name: "small".into(),
            dims: vec![8, 32, 32, 32, 32, 32, 32, 32, 4],
            group_size: 2,
            learning_rate: 0.02,
            epochs: 40,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "tiny" => Ok(Self::tiny()),
            "small" => Ok(Self::small()),
            other => Err(NemoError::config(format!("unknown reference architecture `{other}` (tiny|small)"))),
        }
    }
}

pub const TRAINING_TARGET: f64 = 0.9;

pub fn accuracy(scores: &[Vec<f64>], labels: &[usize]) -> f64 {
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(s, &l)| super::objectives::in_top_k(s, l, 1))
        .count();
    hits as f64 / labels.len().max(1) as f64
}

/// Trains a ReLU MLP with softmax cross-entropy and plain minibatch SGD,
/// then freezes it into a workload. Fails if validation accuracy stays
/// below 90%.
pub fn train_reference(
    arch: &ReferenceArch,
    spec: &DatasetSpec,
    splits: &DatasetSplits,
    rng: &mut impl Rng,
) -> Result<Workload> {
    if splits.train.is_empty() {
        return Err(NemoError::EmptyInput("training split"));
    }
    if arch.dims.len() < 2 || arch.dims[0] != spec.input_dim || *arch.dims.last().unwrap() != spec.num_classes {
        return Err(NemoError::config("architecture does not match the dataset"));
    }
    let nl = arch.dims.len() - 1;
    let mut layers: Vec<DenseLayer> = (0..nl)
        .map(|l| {
            let (i, o) = (arch.dims[l], arch.dims[l + 1]);
            let he = Normal::new(0.0, (2.0 / i as f64).sqrt()).expect("positive std");
            DenseLayer {
                op_type: OpType::Linear,
                in_dim: i,
                out_dim: o,
                weights: (0..i * o).map(|_| he.sample(rng)).collect(),
                bias: vec![0.0; o],
                group_id: l / arch.group_size.max(1),
            }
        })
        .collect();

    let batch = 32;
    let train = &splits.train;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..arch.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch) {
            sgd_step(&mut layers, train, chunk, arch.learning_rate);
        }
        if epoch % 10 == 9 {
            info!("{} epoch {}: trained {} samples", arch.name, epoch + 1, train.len());
        }
    }

    let workload = Workload::new(arch.name.clone(), layers, spec.clone())?;
    let val = &splits.validation;
    let scores: Vec<Vec<f64>> = (0..val.len()).map(|i| workload.forward(val.sample(i))).collect();
    let acc = accuracy(&scores, &val.labels);
    if acc < TRAINING_TARGET {
        return Err(NemoError::TrainingFailed { accuracy: acc, epochs: arch.epochs, target: TRAINING_TARGET });
    }
    info!("{} reference accuracy {:.4}", arch.name, acc);
    Ok(workload)
}

fn sgd_step(layers: &mut [DenseLayer], data: &Dataset, batch: &[usize], lr: f64) {
    let nl = layers.len();
    let mut grad_w: Vec<Vec<f64>> = layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
    let mut grad_b: Vec<Vec<f64>> = layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();

    for &i in batch {
        // forward, keeping every layer input
        let mut acts: Vec<Vec<f64>> = vec![data.sample(i).to_vec()];
        for (l, layer) in layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.apply(&layer.weights, &acts[l], &mut out, l + 1 != nl);
            acts.push(out);
        }
        // softmax cross-entropy gradient at the logits
        let logits = &acts[nl];
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let mut delta: Vec<f64> = exps.iter().map(|e| e / sum).collect();
        delta[data.labels[i]] -= 1.0;

        for l in (0..nl).rev() {
            let layer = &layers[l];
            let input = &acts[l];
            for o in 0..layer.out_dim {
                grad_b[l][o] += delta[o];
                let row = &mut grad_w[l][o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += delta[o] * x;
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (p, w) in prev.iter_mut().zip(row) {
                        *p += delta[o] * w;
                    }
                }
                // ReLU derivative on the hidden activation
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    let scale = lr / batch.len() as f64;
    for (l, layer) in layers.iter_mut().enumerate() {
        for (w, g) in layer.weights.iter_mut().zip(&grad_w[l]) {
            *w -= scale * g;
        }
        for (b, g) in layer.bias.iter_mut().zip(&grad_b[l]) {
            *b -= scale * g;
        }
    }
}
