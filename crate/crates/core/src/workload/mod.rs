//! Quantization workloads: reference classifiers, affine quantizers,
//! calibration, the quantizer graph, and the three search objectives.

mod dataset;
mod graph;
mod io;
mod model;
mod objectives;
mod quant;

pub use dataset::{Dataset, DatasetSpec, DatasetSplits, Split};
pub use graph::{build_graph, feature_width, WorkloadGraph};
pub use io::{load_bit_config, load_workload, save_workload, workload_from_json, workload_to_json, WORKLOAD_FORMAT_VERSION};
pub use model::{accuracy, train_reference, DenseLayer, OpType, ReferenceArch, Workload, TRAINING_TARGET};
pub use objectives::{
    bitops_ratio, bitops_ratio_from_counts, evaluate_objectives, evaluate_report, in_top_k, model_ratio,
    model_ratio_from_counts, top_k_accuracy, ObjectiveReport,
};
pub use quant::Quantizer;

use crate::error::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CALIBRATION_BATCHES: usize = 8;
pub const CALIBRATION_BATCH_SIZE: usize = 32;

/// A calibrated workload together with its regenerated data.
#[derive(Debug, Clone)]
pub struct PreparedWorkload {
    pub workload: Workload,
    pub splits: DatasetSplits,
}

impl PreparedWorkload {
    /// Regenerates the dataset from the workload's generator settings and calibrates.
    pub fn from_workload(mut workload: Workload) -> Result<Self> {
        let splits = workload.dataset_spec().generate()?;
        workload.calibrate(&splits.calibration, CALIBRATION_BATCHES, CALIBRATION_BATCH_SIZE)?;
        Ok(Self { workload, splits })
    }

    /// Trains a bundled reference network on blobs generated from `seed`.
    pub fn reference(arch: &ReferenceArch, seed: u64) -> Result<Self> {
        let spec = DatasetSpec::blobs(seed);
        let splits = spec.generate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7261_696e);
        let workload = train_reference(arch, &spec, &splits, &mut rng)?;
        Self::from_workload(workload)
    }

    pub fn graph(&self) -> Result<WorkloadGraph> {
        build_graph(&self.workload)
    }
}
