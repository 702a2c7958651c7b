//! Multi-species evolutionary search for mixed-precision quantization.
//!
//! The crate is organized bottom-up:
//!
//! * [`mo`] - dominance, non-dominated sorting, weight vectors, R2, niching selection
//! * [`engine`] - the species-partitioned generation loop with bandit-style size allocation
//! * [`direct`] - real-coded species (SBX crossover, polynomial mutation)
//! * [`gnn`] - forward-only graph networks (GCN, graph attention, Graph U-Net)
//! * [`neuro`] - sub-structure neuroevolution over graph-network genomes
//! * [`workload`] - quantizers, calibration, reference networks, objectives
//! * [`harness`] - parallel cached evaluation, exhaustive oracle, benchmarks, run orchestration

pub mod bits;
pub mod direct;
pub mod engine;
pub mod error;
pub mod gnn;
pub mod harness;
pub mod mo;
pub mod neuro;
pub mod workload;

pub use bits::{BitConfig, BitSet};
pub use error::{NemoError, Result};
pub use mo::ObjectiveVector;
