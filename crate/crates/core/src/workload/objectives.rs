use super::dataset::Dataset;
use super::model::Workload;
use crate::bits::BitConfig;
use crate::error::{NemoError, Result};
use crate::mo::ObjectiveVector;

/// Whether `label` is among the `k` highest scores; equal scores rank the
/// lower class index first.
pub fn in_top_k(scores: &[f64], label: usize, k: usize) -> bool {
    let target = scores[label];
    let ahead = scores
        .iter()
        .enumerate()
        .filter(|&(c, &s)| s > target || (s == target && c < label))
        .count();
    ahead < k
}

pub fn top_k_accuracy(scores: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = scores.iter().zip(labels).filter(|(s, &l)| in_top_k(s, l, k)).count();
    hits as f64 / labels.len() as f64
}

fn check_len(expected: usize, config: &BitConfig) -> Result<()> {
    if config.len() != expected {
        return Err(NemoError::DimensionMismatch { expected, got: config.len() });
    }
    Ok(())
}

/// `Σ P_l b_w / (32 Σ P_l)` with weight widths at the even positions.
pub fn model_ratio_from_counts(params: &[usize], config: &BitConfig) -> Result<f64> {
    check_len(2 * params.len(), config)?;
    let bits = config.as_slice();
    let num: f64 = params.iter().enumerate().map(|(l, &p)| p as f64 * bits[2 * l] as f64).sum();
    let den: f64 = params.iter().map(|&p| p as f64).sum::<f64>() * 32.0;
    Ok(num / den)
}

/// `Σ M_l b_w b_a / (1024 Σ M_l)`.
pub fn bitops_ratio_from_counts(macs: &[usize], config: &BitConfig) -> Result<f64> {
    check_len(2 * macs.len(), config)?;
    let bits = config.as_slice();
    let num: f64 = macs
        .iter()
        .enumerate()
        .map(|(l, &m)| m as f64 * bits[2 * l] as f64 * bits[2 * l + 1] as f64)
        .sum();
    let den: f64 = macs.iter().map(|&m| m as f64).sum::<f64>() * 1024.0;
    Ok(num / den)
}

pub fn model_ratio(workload: &Workload, config: &BitConfig) -> Result<f64> {
    model_ratio_from_counts(&workload.param_counts(), config)
}

pub fn bitops_ratio(workload: &Workload, config: &BitConfig) -> Result<f64> {
    bitops_ratio_from_counts(&workload.mac_counts(), config)
}

/// Everything computed for one configuration; `objectives()` is the
/// minimization vector the search sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveReport {
    pub top1: f64,
    pub topk: f64,
    pub model_ratio: f64,
    pub bitops_ratio: f64,
}

impl ObjectiveReport {
    pub fn objectives(&self) -> ObjectiveVector {
        ObjectiveVector::new(vec![1.0 - self.topk, self.model_ratio, self.bitops_ratio])
            .expect("objective components are finite")
    }
}

pub fn evaluate_report(workload: &Workload, config: &BitConfig, data: &Dataset, top_k: usize) -> Result<ObjectiveReport> {
    if top_k == 0 || top_k > workload.num_classes() {
        return Err(NemoError::config(format!("top_k must be in 1..={}", workload.num_classes())));
    }
    let scores = workload.quantized_forward(config, data)?;
    Ok(ObjectiveReport {
        top1: top_k_accuracy(&scores, &data.labels, 1),
        topk: top_k_accuracy(&scores, &data.labels, top_k),
        model_ratio: model_ratio(workload, config)?,
        bitops_ratio: bitops_ratio(workload, config)?,
    })
}

pub fn evaluate_objectives(workload: &Workload, config: &BitConfig, data: &Dataset, top_k: usize) -> Result<ObjectiveVector> {
    Ok(evaluate_report(workload, config, data, top_k)?.objectives())
}
