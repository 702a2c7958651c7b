use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::DatasetSpec;
use super::model::{DenseLayer, OpType, Workload};
use crate::bits::BitConfig;
use crate::error::{NemoError, Result};

pub const WORKLOAD_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    op_type: OpType,
    /// `[out_dim, in_dim]`
    shape: [usize; 2],
    weights: Vec<f64>,
    bias: Vec<f64>,
    macs: usize,
    group_id: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    name: String,
    dataset: DatasetSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    format_version: u32,
    layers: Vec<LayerRecord>,
    metadata: Metadata,
}

pub fn workload_to_json(workload: &Workload) -> Result<String> {
    let file = WorkloadFile {
        format_version: WORKLOAD_FORMAT_VERSION,
        layers: workload
            .layers()
            .iter()
            .map(|l| LayerRecord {
                op_type: l.op_type,
                shape: [l.out_dim, l.in_dim],
                weights: l.weights.clone(),
                bias: l.bias.clone(),
                macs: l.macs(),
                group_id: l.group_id,
            })
            .collect(),
        metadata: Metadata { name: workload.name.clone(), dataset: workload.dataset_spec().clone() },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Parses a workload file. The result is not calibrated.
pub fn workload_from_json(text: &str) -> Result<Workload> {
    let file: WorkloadFile = serde_json::from_str(text)?;
    if file.format_version != WORKLOAD_FORMAT_VERSION {
        return Err(NemoError::config(format!(
            "workload format_version {} is not supported (expected {WORKLOAD_FORMAT_VERSION})",
            file.format_version
        )));
    }
    let layers = file
        .layers
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let [out_dim, in_dim] = r.shape;
            if r.macs != in_dim * out_dim {
                return Err(NemoError::config(format!(
                    "layer {i}: macs {} does not match shape {out_dim}x{in_dim}",
                    r.macs
                )));
            }
            Ok(DenseLayer { op_type: r.op_type, in_dim, out_dim, weights: r.weights, bias: r.bias, group_id: r.group_id })
        })
        .collect::<Result<Vec<_>>>()?;
    Workload::new(file.metadata.name, layers, file.metadata.dataset)
}

pub fn save_workload(workload: &Workload, path: &Path) -> Result<()> {
    fs::write(path, workload_to_json(workload)?)?;
    Ok(())
}

pub fn load_workload(path: &Path) -> Result<Workload> {
    workload_from_json(&fs::read_to_string(path)?)
}

pub fn load_bit_config(path: &Path) -> Result<BitConfig> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
