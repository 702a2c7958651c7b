use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{gat_forward, gcn_forward, graph_unet_forward, selu, Adjacency, UnetParams};
use super::Tensor;
use crate::error::{NemoError, Result};
use crate::workload::WorkloadGraph;

const GENOME_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphLayerKind {
    Gcn,
    GraphUnet,
}

/// Architecture descriptor; fixes every parameter shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnnArch {
    pub kind: GraphLayerKind,
    pub in_dim: usize,
    /// Graph layer width, then attention width.
    pub hidden: [usize; 2],
    pub heads: usize,
    pub depth: usize,
    pub pool_ratio: f64,
    pub out_dim: usize,
}

impl GnnArch {
    /// Hidden sizes (10, 8), 4 attention heads, U-Net depth 3, pooling ratio 0.5.
    pub fn with_defaults(kind: GraphLayerKind, in_dim: usize, out_dim: usize) -> Self {
        Self { kind, in_dim, hidden: [10, 8], heads: 4, depth: 3, pool_ratio: 0.5, out_dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 || self.hidden.contains(&0) || self.heads == 0 {
            return Err(NemoError::config(format!("degenerate architecture {self:?}")));
        }
        if self.kind == GraphLayerKind::GraphUnet {
            if self.depth == 0 {
                return Err(NemoError::config("graph U-Net depth must be at least 1"));
            }
            if !(self.pool_ratio > 0.0 && self.pool_ratio <= 1.0) {
                return Err(NemoError::config(format!("pool ratio {} outside (0, 1]", self.pool_ratio)));
            }
        }
        Ok(())
    }

    /// Canonical `(name, shape, fan_in)` list.
    pub fn param_specs(&self) -> Vec<(String, Vec<usize>, usize)> {
        let [h0, h1] = self.hidden;
        let mut specs = Vec::new();
        match self.kind {
            GraphLayerKind::Gcn => {
                specs.push(("gcn.weight".into(), vec![self.in_dim, h0], self.in_dim));
                specs.push(("gcn.bias".into(), vec![h0], self.in_dim));
            }
            GraphLayerKind::GraphUnet => {
                specs.push(("unet.down0.weight".into(), vec![self.in_dim, h0], self.in_dim));
                specs.push(("unet.down0.bias".into(), vec![h0], self.in_dim));
                for i in 1..=self.depth {
                    specs.push((format!("unet.pool{i}.projection"), vec![h0], h0));
                    specs.push((format!("unet.down{i}.weight"), vec![h0, h0], h0));
                    specs.push((format!("unet.down{i}.bias"), vec![h0], h0));
                }
                for i in 0..self.depth {
                    specs.push((format!("unet.up{i}.weight"), vec![h0, h0], h0));
                    specs.push((format!("unet.up{i}.bias"), vec![h0], h0));
                }
            }
        }
        specs.push(("gat.weight".into(), vec![self.heads, h0, h1], h0));
        specs.push(("gat.attention".into(), vec![self.heads, 2 * h1], 2 * h1));
        specs.push(("gat.bias".into(), vec![h1], h0));
        specs.push(("linear.weight".into(), vec![h1, self.out_dim], h1));
        specs.push(("linear.bias".into(), vec![self.out_dim], h1));
        specs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: Tensor,
}

/// Architecture plus parameters in canonical order. Immutable once built;
/// variation operators return new genomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnnGenome {
    format_version: u32,
    arch: GnnArch,
    params: Vec<NamedTensor>,
}

#[derive(Deserialize)]
struct GenomeRepr {
    format_version: u32,
    arch: GnnArch,
    params: Vec<NamedTensor>,
}

impl<'de> Deserialize<'de> for GnnGenome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GenomeRepr::deserialize(d)?;
        if repr.format_version != GENOME_FORMAT_VERSION {
            return Err(serde::de::Error::custom(format!(
                "unsupported genome format version {}",
                repr.format_version
            )));
        }
        GnnGenome::new(repr.arch, repr.params).map_err(serde::de::Error::custom)
    }
}

impl GnnGenome {
    /// Shape-checks `params` against `arch`.
    pub fn new(arch: GnnArch, params: Vec<NamedTensor>) -> Result<Self> {
        arch.validate()?;
        let specs = arch.param_specs();
        if specs.len() != params.len() {
            return Err(NemoError::DimensionMismatch { expected: specs.len(), got: params.len() });
        }
        for ((name, shape, _), p) in specs.iter().zip(&params) {
            if *name != p.name || shape.as_slice() != p.tensor.shape() {
                return Err(NemoError::contract(format!(
                    "parameter {} {:?} does not match expected {name} {shape:?}",
                    p.name,
                    p.tensor.shape()
                )));
            }
        }
        Ok(Self { format_version: GENOME_FORMAT_VERSION, arch, params })
    }

    /// Uniform initialization in `±1/sqrt(fan_in)`.
    pub fn random(arch: GnnArch, rng: &mut impl Rng) -> Result<Self> {
        arch.validate()?;
        let params = arch
            .param_specs()
            .into_iter()
            .map(|(name, shape, fan_in)| {
                let bound = 1.0 / (fan_in as f64).sqrt();
                let n: usize = shape.iter().product();
                let data = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
                NamedTensor { name, tensor: Tensor::new(shape, data).expect("shape from layout") }
            })
            .collect();
        Self::new(arch, params)
    }

    pub fn zeros(arch: GnnArch) -> Result<Self> {
        arch.validate()?;
        let params = arch
            .param_specs()
            .into_iter()
            .map(|(name, shape, _)| NamedTensor { name, tensor: Tensor::zeros(&shape) })
            .collect();
        Self::new(arch, params)
    }

    pub fn arch(&self) -> &GnnArch {
        &self.arch
    }

    pub fn params(&self) -> &[NamedTensor] {
        &self.params
    }

    /// Replaces parameter data, keeping names and shapes.
    pub fn with_tensors(&self, tensors: Vec<Tensor>) -> Result<Self> {
        let params = self
            .params
            .iter()
            .zip(tensors)
            .map(|(p, t)| NamedTensor { name: p.name.clone(), tensor: t })
            .collect::<Vec<_>>();
        Self::new(self.arch.clone(), params)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn get(&self, name: &str) -> &Tensor {
        &self
            .params
            .iter()
            .find(|p| p.name == name)
            .unwrap_or_else(|| panic!("validated genome lacks {name}"))
            .tensor
    }
}

/// Runs the six-stage network; returns one logit row per node.
pub fn gnn_infer(genome: &GnnGenome, graph: &WorkloadGraph) -> Result<Tensor> {
    gnn_infer_features(genome, graph.features(), graph.adjacency())
}

pub fn gnn_infer_features(genome: &GnnGenome, features: &Tensor, adj: &Adjacency) -> Result<Tensor> {
    let arch = genome.arch();
    if features.cols() != arch.in_dim {
        return Err(NemoError::DimensionMismatch { expected: arch.in_dim, got: features.cols() });
    }
    let x = match arch.kind {
        GraphLayerKind::Gcn => {
            gcn_forward(genome.get("gcn.weight"), Some(genome.get("gcn.bias")), features, adj)?
        }
        GraphLayerKind::GraphUnet => {
            let names: Vec<(String, String)> = (0..=arch.depth)
                .map(|i| (format!("unet.down{i}.weight"), format!("unet.down{i}.bias")))
                .collect();
            let pools: Vec<String> = (1..=arch.depth).map(|i| format!("unet.pool{i}.projection")).collect();
            let ups: Vec<(String, String)> = (0..arch.depth)
                .map(|i| (format!("unet.up{i}.weight"), format!("unet.up{i}.bias")))
                .collect();
            let params = UnetParams {
                down: names.iter().map(|(w, b)| (genome.get(w), genome.get(b))).collect(),
                pools: pools.iter().map(|p| genome.get(p)).collect(),
                up: ups.iter().map(|(w, b)| (genome.get(w), genome.get(b))).collect(),
            };
            graph_unet_forward(&params, features, adj, arch.depth, arch.pool_ratio)?
        }
    };
    let x = selu(&x);
    let x = gat_forward(
        genome.get("gat.weight"),
        genome.get("gat.attention"),
        Some(genome.get("gat.bias")),
        &x,
        adj,
        arch.heads,
    )?;
    let x = selu(&x);
    let mut x = x.matmul(genome.get("linear.weight"))?;
    x.add_row_bias(genome.get("linear.bias"))?;
    Ok(selu(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain(n: usize) -> Adjacency {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Adjacency::from_edges(n, &edges).unwrap()
    }

    fn features(n: usize, d: usize, rng: &mut impl Rng) -> Tensor {
        Tensor::new(vec![n, d], (0..n * d).map(|_| rng.random_range(0.0..3.0)).collect()).unwrap()
    }

    #[test]
    fn table_defaults_pass_shape_check() {
        for kind in [GraphLayerKind::Gcn, GraphLayerKind::GraphUnet] {
            let arch = GnnArch::with_defaults(kind, 7, 7);
            let g = GnnGenome::random(arch.clone(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            assert_eq!(g.params().len(), arch.param_specs().len());
        }
    }

    #[test]
    fn wrong_shapes_rejected() {
        let arch = GnnArch::with_defaults(GraphLayerKind::Gcn, 5, 7);
        let g = GnnGenome::zeros(arch.clone()).unwrap();
        let mut params = g.params().to_vec();
        params[0].tensor = Tensor::zeros(&[4, 10]);
        assert!(GnnGenome::new(arch.clone(), params).is_err());
        let mut params = g.params().to_vec();
        params.swap(0, 1);
        assert!(GnnGenome::new(arch, params).is_err());
    }

    #[test]
    fn zero_parameters_give_zero_logits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [GraphLayerKind::Gcn, GraphLayerKind::GraphUnet] {
            let g = GnnGenome::zeros(GnnArch::with_defaults(kind, 6, 7)).unwrap();
            let out = gnn_infer_features(&g, &features(9, 6, &mut rng), &chain(9)).unwrap();
            assert_eq!(out.shape(), &[9, 7]);
            assert!(out.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn deterministic_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kind in [GraphLayerKind::Gcn, GraphLayerKind::GraphUnet] {
            let g = GnnGenome::random(GnnArch::with_defaults(kind, 6, 7), &mut rng).unwrap();
            let x = features(16, 6, &mut rng);
            let a = gnn_infer_features(&g, &x, &chain(16)).unwrap();
            let b = gnn_infer_features(&g, &x, &chain(16)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn large_weights_stay_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [GraphLayerKind::Gcn, GraphLayerKind::GraphUnet] {
            let arch = GnnArch::with_defaults(kind, 6, 7);
            for _ in 0..20 {
                let tensors: Vec<Tensor> = arch
                    .param_specs()
                    .iter()
                    .map(|(_, s, _)| {
                        let n: usize = s.iter().product();
                        Tensor::new(s.clone(), (0..n).map(|_| rng.random_range(-10.0..=10.0)).collect()).unwrap()
                    })
                    .collect();
                let g = GnnGenome::zeros(arch.clone()).unwrap().with_tensors(tensors).unwrap();
                // bounded features: one-hots, ndim <= 4, ln(1 + numel) <= ~17
                let x = Tensor::new(vec![16, 6], (0..96).map(|i| [1.0, 0.0, 2.0, 17.0, 1.0, 0.0][i % 6]).collect()).unwrap();
                let out = gnn_infer_features(&g, &x, &chain(16)).unwrap();
                assert!(out.is_finite());
            }
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = GnnGenome::random(
            GnnArch::with_defaults(GraphLayerKind::GraphUnet, 6, 7),
            &mut ChaCha8Rng::seed_from_u64(4),
        )
        .unwrap();
        let back = GnnGenome::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);

        let bumped = g.to_json().unwrap().replace("\"format_version\":1", "\"format_version\":9");
        assert!(GnnGenome::from_json(&bumped).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn node_permutation_equivariance(n in 1usize..10, seed in any::<u64>(), unet in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kind = if unet { GraphLayerKind::GraphUnet } else { GraphLayerKind::Gcn };
            let g = GnnGenome::random(GnnArch::with_defaults(kind, 4, 7), &mut rng).unwrap();
            let x = features(n, 4, &mut rng);
            let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            // node i moves to position perm[i]
            let mut px = Tensor::zeros(&[n, 4]);
            for i in 0..n {
                px.row_mut(perm[i]).copy_from_slice(x.row(i));
            }
            let pedges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            let out = gnn_infer_features(&g, &x, &Adjacency::from_edges(n, &edges).unwrap()).unwrap();
            let pout = gnn_infer_features(&g, &px, &Adjacency::from_edges(n, &pedges).unwrap()).unwrap();
            for i in 0..n {
                for (a, b) in out.row(i).iter().zip(pout.row(perm[i])) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
