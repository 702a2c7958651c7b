//! Sub-structure neuroevolution over graph-network genomes.
//!
//! Crossover swaps individual tensor elements between two aligned parents;
//! mutation perturbs a fixed fraction of each tensor's elements with
//! value-proportional Gaussian noise. Bit widths are read off the network's
//! per-node logits.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bits::{BitConfig, BitSet};
use crate::engine::{EngineRng, Genome, SpeciesOps};
use crate::error::{NemoError, Result};
use crate::gnn::{gnn_infer, softmax, GnnArch, GnnGenome, GraphLayerKind, Tensor};
use crate::workload::WorkloadGraph;

/// Noise floor so zero-valued elements still move.
pub const NOISE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsneConfig {
    pub cr_dist: f64,
    pub mut_dist: f64,
    pub mut_fraction: f64,
    pub mut_strength: f64,
}

impl Default for SsneConfig {
    fn default() -> Self {
        Self { cr_dist: 1.0, mut_dist: 1.0, mut_fraction: 0.05, mut_strength: 0.1 }
    }
}

impl SsneConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("cr_dist", self.cr_dist), ("mut_dist", self.mut_dist)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NemoError::config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.mut_fraction > 0.0 && self.mut_fraction <= 1.0) {
            return Err(NemoError::config(format!("mut_fraction must lie in (0, 1], got {}", self.mut_fraction)));
        }
        if !(self.mut_strength >= 0.0 && self.mut_strength.is_finite()) {
            return Err(NemoError::config("mut_strength must be finite and non-negative"));
        }
        Ok(())
    }

    /// Number of elements mutated in a tensor of `numel` elements.
    pub fn mutation_count(&self, numel: usize) -> usize {
        // guard against 0.05 * 60 = 3.0000000000000004
        ((self.mut_fraction * numel as f64 - 1e-9).ceil() as usize).clamp(1, numel)
    }
}

/// Uniform crossover of one aligned tensor pair, applied with probability
/// `cr_dist`; each element swaps between the children with probability one half.
pub fn crossover_tensor_pair(
    a: &Tensor,
    b: &Tensor,
    cfg: &SsneConfig,
    rng: &mut impl Rng,
) -> Result<(Tensor, Tensor)> {
    if a.shape() != b.shape() {
        return Err(NemoError::contract(format!("tensor shapes {:?} vs {:?}", a.shape(), b.shape())));
    }
    let mut ta = a.clone();
    let mut tb = b.clone();
    if rng.random_bool(cfg.cr_dist) {
        for (x, y) in ta.data_mut().iter_mut().zip(tb.data_mut().iter_mut()) {
            if rng.random_bool(0.5) {
                std::mem::swap(x, y);
            }
        }
    }
    Ok((ta, tb))
}

/// Tensor-wise uniform crossover of two genomes with identical architecture.
pub fn ssne_crossover(
    a: &GnnGenome,
    b: &GnnGenome,
    cfg: &SsneConfig,
    rng: &mut impl Rng,
) -> Result<(GnnGenome, GnnGenome)> {
    if a.arch() != b.arch() {
        return Err(NemoError::contract("crossover between different architectures"));
    }
    let mut left = Vec::with_capacity(a.params().len());
    let mut right = Vec::with_capacity(a.params().len());
    for (pa, pb) in a.params().iter().zip(b.params()) {
        let (ta, tb) = crossover_tensor_pair(&pa.tensor, &pb.tensor, cfg, rng)?;
        left.push(ta);
        right.push(tb);
    }
    Ok((a.with_tensors(left)?, b.with_tensors(right)?))
}

/// With probability `mut_dist`, perturbs `ceil(mut_fraction * numel)`
/// distinct elements of every tensor by `N(0, (mut_strength * |x| + floor)^2)`.
pub fn ssne_mutate(g: &GnnGenome, cfg: &SsneConfig, rng: &mut impl Rng) -> Result<GnnGenome> {
    if !rng.random_bool(cfg.mut_dist) {
        return Ok(g.clone());
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let tensors = g
        .params()
        .iter()
        .map(|p| {
            let mut t: Tensor = p.tensor.clone();
            let n = t.numel();
            let picks = index::sample(rng, n, cfg.mutation_count(n));
            for i in picks.iter() {
                let x = t.data()[i];
                let sigma = cfg.mut_strength * x.abs() + NOISE_FLOOR;
                let mut noise = 0.0;
                while noise == 0.0 {
                    noise = sigma * std_normal.sample(rng);
                }
                t.data_mut()[i] = x + noise;
            }
            t
        })
        .collect();
    g.with_tensors(tensors)
}

fn check_width(genome: &GnnGenome, bits: &BitSet) -> Result<()> {
    if genome.arch().out_dim != bits.len() {
        return Err(NemoError::DimensionMismatch { expected: bits.len(), got: genome.arch().out_dim });
    }
    Ok(())
}

/// Index of the largest value; the first (lowest width) wins ties.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Per-node bit probabilities (softmax over each logit row).
pub fn bit_probabilities(genome: &GnnGenome, graph: &WorkloadGraph, bits: &BitSet) -> Result<Vec<Vec<f64>>> {
    check_width(genome, bits)?;
    let logits = gnn_infer(genome, graph)?;
    Ok((0..logits.rows()).map(|i| softmax(logits.row(i))).collect())
}

/// Most probable bit width per node. Softmax is monotone, so the argmax is
/// taken directly on the logits.
pub fn decode_neuro(genome: &GnnGenome, graph: &WorkloadGraph, bits: &BitSet) -> Result<BitConfig> {
    check_width(genome, bits)?;
    let logits = gnn_infer(genome, graph)?;
    Ok(BitConfig(
        (0..logits.rows())
            .map(|i| bits.as_slice()[argmax(logits.row(i))])
            .collect(),
    ))
}

/// Draws each node's width from its softmax distribution instead of taking
/// the argmax. Not used by the species (fitness must be a function of the
/// genome); kept for experiments.
pub fn sample_bits(
    genome: &GnnGenome,
    graph: &WorkloadGraph,
    bits: &BitSet,
    rng: &mut impl Rng,
) -> Result<BitConfig> {
    let probs = bit_probabilities(genome, graph, bits)?;
    Ok(BitConfig(
        probs
            .iter()
            .map(|row| {
                let mut u: f64 = rng.random();
                for (i, p) in row.iter().enumerate() {
                    if u < *p {
                        return bits.as_slice()[i];
                    }
                    u -= p;
                }
                bits.max()
            })
            .collect(),
    ))
}

/// Graph-network species: GCN or Graph U-Net front end, SSNE variation.
#[derive(Debug, Clone)]
pub struct NeuroSpecies {
    name: String,
    arch: GnnArch,
    graph: Arc<WorkloadGraph>,
    bits: BitSet,
    cfg: SsneConfig,
}

impl NeuroSpecies {
    pub fn new(
        name: impl Into<String>,
        arch: GnnArch,
        graph: Arc<WorkloadGraph>,
        bits: BitSet,
        cfg: SsneConfig,
    ) -> Result<Self> {
        arch.validate()?;
        cfg.validate()?;
        if arch.in_dim != graph.feature_width() {
            return Err(NemoError::DimensionMismatch { expected: graph.feature_width(), got: arch.in_dim });
        }
        if arch.out_dim != bits.len() {
            return Err(NemoError::DimensionMismatch { expected: bits.len(), got: arch.out_dim });
        }
        Ok(Self { name: name.into(), arch, graph, bits, cfg })
    }

    /// Default-architecture species for a graph and bit set.
    pub fn with_defaults(kind: GraphLayerKind, graph: Arc<WorkloadGraph>, bits: BitSet, cfg: SsneConfig) -> Result<Self> {
        let arch = GnnArch::with_defaults(kind, graph.feature_width(), bits.len());
        let name = match kind {
            GraphLayerKind::Gcn => "gcn",
            GraphLayerKind::GraphUnet => "graph_unet",
        };
        Self::new(name, arch, graph, bits, cfg)
    }

    pub fn arch(&self) -> &GnnArch {
        &self.arch
    }

    fn unwrap<'a>(&self, g: &'a Genome) -> Result<&'a GnnGenome> {
        match g {
            Genome::Neural(n) => Ok(n),
            _ => Err(NemoError::contract(format!("species {} received a non-network genome", self.name))),
        }
    }
}

impl SpeciesOps for NeuroSpecies {
    fn name(&self) -> &str {
        &self.name
    }

    fn random_genome(&self, rng: &mut EngineRng) -> Genome {
        Genome::Neural(GnnGenome::random(self.arch.clone(), rng).expect("architecture validated"))
    }

    fn crossover(&self, a: &Genome, b: &Genome, rng: &mut EngineRng) -> Result<(Genome, Genome)> {
        let (x, y) = ssne_crossover(self.unwrap(a)?, self.unwrap(b)?, &self.cfg, rng)?;
        Ok((Genome::Neural(x), Genome::Neural(y)))
    }

    fn mutate(&self, g: &Genome, rng: &mut EngineRng) -> Result<Genome> {
        Ok(Genome::Neural(ssne_mutate(self.unwrap(g)?, &self.cfg, rng)?))
    }

    fn decode(&self, g: &Genome) -> Result<BitConfig> {
        decode_neuro(self.unwrap(g)?, &self.graph, &self.bits)
    }
}
