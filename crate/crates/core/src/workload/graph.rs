use super::model::{OpType, Workload};
use crate::error::{NemoError, Result};
use crate::gnn::{Adjacency, Tensor};

/// Chain graph over quantizer nodes with per-node feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadGraph {
    features: Tensor,
    edges: Vec<(usize, usize)>,
    adjacency: Adjacency,
}

impl WorkloadGraph {
    pub fn new(features: Tensor, edges: Vec<(usize, usize)>) -> Result<Self> {
        if features.shape().len() != 2 || features.rows() == 0 {
            return Err(NemoError::EmptyInput("graph features"));
        }
        if !features.is_finite() {
            return Err(NemoError::contract("non-finite node feature"));
        }
        let adjacency = Adjacency::from_edges(features.rows(), &edges)?;
        Ok(Self { features, edges, adjacency })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_width(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }
}

/// Feature column layout: op one-hot, weight flag, tensor rank,
/// `ln(1 + numel)`, group one-hot.
pub fn feature_width(num_groups: usize) -> usize {
    OpType::ALL.len() + 3 + num_groups
}

/// One node per quantizer (weight, then input activation, per layer)
/// chained in order.
pub fn build_graph(workload: &Workload) -> Result<WorkloadGraph> {
    let layers = workload.layers();
    let num_groups = layers.iter().map(|l| l.group_id).max().unwrap_or(0) + 1;
    let width = feature_width(num_groups);
    let ops = OpType::ALL.len();
    let mut rows = Vec::with_capacity(2 * layers.len());
    for layer in layers {
        for is_weight in [true, false] {
            let mut row = vec![0.0; width];
            row[layer.op_type.index()] = 1.0;
            let (ndim, numel) = if is_weight { (2.0, layer.weights.len()) } else { (1.0, layer.in_dim) };
            row[ops] = if is_weight { 1.0 } else { 0.0 };
            row[ops + 1] = ndim;
            row[ops + 2] = (1.0 + numel as f64).ln();
            row[ops + 3 + layer.group_id] = 1.0;
            rows.push(row);
        }
    }
    let edges = (1..rows.len()).map(|i| (i - 1, i)).collect();
    WorkloadGraph::new(Tensor::from_rows(&rows)?, edges)
}
