use super::Tensor;
use crate::error::{NemoError, Result};

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;
const LEAKY_SLOPE: f64 = 0.2;

#[inline]
pub fn selu_scalar(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
    }
}

pub fn selu(x: &Tensor) -> Tensor {
    x.map(selu_scalar)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Undirected neighbour lists (self-loops excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    /// Builds the undirected closure of a directed edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(NemoError::contract(format!("edge ({a},{b}) outside {n} nodes")));
            }
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { neighbors })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Two-hop connectivity, used before pooling so that sparse chains stay
    /// connected after nodes are dropped.
    pub fn squared(&self) -> Adjacency {
        let neighbors = (0..self.len())
            .map(|i| {
                let mut out: Vec<usize> = self.neighbors[i].clone();
                for &j in &self.neighbors[i] {
                    out.extend(self.neighbors[j].iter().copied().filter(|&k| k != i));
                }
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        Adjacency { neighbors }
    }

    /// Subgraph induced by `keep` (indices into the current graph), relabelled
    /// to positions in `keep`.
    pub fn induced(&self, keep: &[usize]) -> Adjacency {
        let mut pos = vec![usize::MAX; self.len()];
        for (p, &k) in keep.iter().enumerate() {
            pos[k] = p;
        }
        let neighbors = keep
            .iter()
            .map(|&k| {
                self.neighbors[k]
                    .iter()
                    .filter(|&&j| pos[j] != usize::MAX)
                    .map(|&j| pos[j])
                    .collect()
            })
            .collect();
        Adjacency { neighbors }
    }
}

fn check_rows(features: &Tensor, adj: &Adjacency) -> Result<()> {
    if features.rows() != adj.len() {
        return Err(NemoError::DimensionMismatch { expected: adj.len(), got: features.rows() });
    }
    Ok(())
}

/// Symmetrically normalized graph convolution with self-loops:
/// `D^-1/2 (A + I) D^-1/2 H W (+ b)`.
pub fn gcn_forward(
    weight: &Tensor,
    bias: Option<&Tensor>,
    features: &Tensor,
    adj: &Adjacency,
) -> Result<Tensor> {
    check_rows(features, adj)?;
    let hw = features.matmul(weight)?;
    let n = adj.len();
    let deg: Vec<f64> = (0..n).map(|i| (adj.neighbors(i).len() + 1) as f64).collect();
    let mut out = Tensor::zeros(&[n, hw.cols()]);
    for i in 0..n {
        let row = out.row_mut(i);
        for j in std::iter::once(i).chain(adj.neighbors(i).iter().copied()) {
            let coef = 1.0 / (deg[i] * deg[j]).sqrt();
            for (o, v) in row.iter_mut().zip(hw.row(j)) {
                *o += coef * v;
            }
        }
    }
    if let Some(b) = bias {
        out.add_row_bias(b)?;
    }
    Ok(out)
}

/// Per-head, per-node attention weights as `(neighbour, weight)` pairs.
pub type AttentionWeights = Vec<Vec<Vec<(usize, f64)>>>;

/// Multi-head graph attention over each node's neighbourhood plus itself.
/// `weight` is `[heads, in, out]`, `attention` is `[heads, 2 * out]`; head
/// outputs are averaged.
pub fn gat_forward(
    weight: &Tensor,
    attention: &Tensor,
    bias: Option<&Tensor>,
    features: &Tensor,
    adj: &Adjacency,
    heads: usize,
) -> Result<Tensor> {
    gat_forward_with_attention(weight, attention, bias, features, adj, heads).map(|(t, _)| t)
}

pub fn gat_forward_with_attention(
    weight: &Tensor,
    attention: &Tensor,
    bias: Option<&Tensor>,
    features: &Tensor,
    adj: &Adjacency,
    heads: usize,
) -> Result<(Tensor, AttentionWeights)> {
    check_rows(features, adj)?;
    if weight.shape().len() != 3 || weight.shape()[0] != heads {
        return Err(NemoError::contract(format!(
            "attention weight shape {:?} does not match {heads} heads",
            weight.shape()
        )));
    }
    let out_dim = weight.shape()[2];
    if attention.shape() != [heads, 2 * out_dim] {
        return Err(NemoError::contract(format!(
            "attention vector shape {:?}, expected [{heads}, {}]",
            attention.shape(),
            2 * out_dim
        )));
    }
    let n = adj.len();
    let mut out = Tensor::zeros(&[n, out_dim]);
    let mut all_weights = Vec::with_capacity(heads);
    for h in 0..heads {
        let z = features.matmul(&weight.slab(h))?;
        let a = attention.slab(h);
        let (a_src, a_dst) = a.data().split_at(out_dim);
        let left: Vec<f64> = (0..n).map(|i| dot(a_src, z.row(i))).collect();
        let right: Vec<f64> = (0..n).map(|j| dot(a_dst, z.row(j))).collect();

        let mut head_weights = Vec::with_capacity(n);
        for i in 0..n {
            let hood: Vec<usize> = std::iter::once(i).chain(adj.neighbors(i).iter().copied()).collect();
            let logits: Vec<f64> = hood
                .iter()
                .map(|&j| {
                    let e = left[i] + right[j];
                    if e > 0.0 { e } else { LEAKY_SLOPE * e }
                })
                .collect();
            let alpha = softmax(&logits);
            let row = out.row_mut(i);
            for (&j, &w) in hood.iter().zip(&alpha) {
                for (o, v) in row.iter_mut().zip(z.row(j)) {
                    *o += w * v / heads as f64;
                }
            }
            head_weights.push(hood.into_iter().zip(alpha).collect());
        }
        all_weights.push(head_weights);
    }
    if let Some(b) = bias {
        out.add_row_bias(b)?;
    }
    Ok((out, all_weights))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Top-k pooling: keeps the `ceil(ratio * n)` highest-scoring nodes (score =
/// projection onto `p / |p|`), gated by the sigmoid of their score. Retained
/// indices are returned in ascending node order.
pub fn topk_pool(
    features: &Tensor,
    adj: &Adjacency,
    projection: &Tensor,
    ratio: f64,
) -> Result<(Tensor, Adjacency, Vec<usize>)> {
    check_rows(features, adj)?;
    if projection.numel() != features.cols() {
        return Err(NemoError::DimensionMismatch { expected: features.cols(), got: projection.numel() });
    }
    let n = features.rows();
    let norm = projection.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    let scores: Vec<f64> = (0..n)
        .map(|i| if norm > 0.0 { dot(features.row(i), projection.data()) / norm } else { 0.0 })
        .collect();
    let k = ((ratio * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();

    let mut pooled = Tensor::zeros(&[k, features.cols()]);
    for (p, &i) in keep.iter().enumerate() {
        let gate = sigmoid(scores[i]);
        for (o, v) in pooled.row_mut(p).iter_mut().zip(features.row(i)) {
            *o = v * gate;
        }
    }
    Ok((pooled, adj.induced(&keep), keep))
}

/// Scatters pooled rows back to their original positions; dropped rows are zero.
pub fn unpool(pooled: &Tensor, keep: &[usize], n: usize) -> Result<Tensor> {
    if pooled.rows() != keep.len() {
        return Err(NemoError::DimensionMismatch { expected: keep.len(), got: pooled.rows() });
    }
    let mut out = Tensor::zeros(&[n, pooled.cols()]);
    for (p, &i) in keep.iter().enumerate() {
        out.row_mut(i).copy_from_slice(pooled.row(p));
    }
    Ok(out)
}

/// Parameters of a Graph U-Net. `down` holds `depth + 1` convolutions,
/// `pools` and `up` hold `depth` entries each.
pub struct UnetParams<'a> {
    pub down: Vec<(&'a Tensor, &'a Tensor)>,
    pub pools: Vec<&'a Tensor>,
    pub up: Vec<(&'a Tensor, &'a Tensor)>,
}

/// Encoder of GCN + top-k pooling blocks, decoder of unpooling + GCN with
/// additive skip connections. Output has the input's row count.
pub fn graph_unet_forward(
    params: &UnetParams<'_>,
    features: &Tensor,
    adj: &Adjacency,
    depth: usize,
    ratio: f64,
) -> Result<Tensor> {
    if depth == 0 {
        return Err(NemoError::contract("graph U-Net depth must be at least 1"));
    }
    if params.down.len() != depth + 1 || params.pools.len() != depth || params.up.len() != depth {
        return Err(NemoError::contract(format!("parameter counts do not match depth {depth}")));
    }
    let (w, b) = params.down[0];
    let mut x = selu(&gcn_forward(w, Some(b), features, adj)?);
    let mut skips = vec![x.clone()];
    let mut graphs = vec![adj.clone()];
    let mut kept = Vec::with_capacity(depth);
    let mut g = adj.clone();

    for i in 1..=depth {
        let (px, pg, keep) = topk_pool(&x, &g.squared(), params.pools[i - 1], ratio)?;
        let (w, b) = params.down[i];
        x = selu(&gcn_forward(w, Some(b), &px, &pg)?);
        g = pg;
        if i < depth {
            skips.push(x.clone());
            graphs.push(g.clone());
        }
        kept.push(keep);
    }

    for i in 0..depth {
        let j = depth - 1 - i;
        let res = &skips[j];
        let up = unpool(&x, &kept[j], res.rows())?;
        let merged = res.add(&up)?;
        let (w, b) = params.up[i];
        x = gcn_forward(w, Some(b), &merged, &graphs[j])?;
        if i + 1 < depth {
            x = selu(&x);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eye(n: usize) -> Tensor {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data_mut()[i * n + i] = 1.0;
        }
        t
    }

    fn random(shape: &[usize], rng: &mut impl Rng) -> Tensor {
        let n: usize = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn chain(n: usize) -> Adjacency {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Adjacency::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn selu_values() {
        assert_eq!(selu_scalar(0.0), 0.0);
        assert!((selu_scalar(1.0) - 1.0507).abs() < 1e-4);
        assert!((selu_scalar(-50.0) + 1.7581).abs() < 1e-4);
    }

    #[test]
    fn gcn_single_node_identity() {
        let x = Tensor::from_rows(&[vec![0.3, -0.7]]).unwrap();
        let adj = Adjacency::from_edges(1, &[]).unwrap();
        assert_eq!(gcn_forward(&eye(2), None, &x, &adj).unwrap(), x);
    }

    #[test]
    fn gcn_two_node_path_mixes_halves() {
        let x = Tensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let out = gcn_forward(&eye(2), None, &x, &chain(2)).unwrap();
        for v in out.data() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gcn_shape_and_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = random(&[5, 3], &mut rng);
        let w = random(&[3, 4], &mut rng);
        assert_eq!(gcn_forward(&w, None, &x, &chain(5)).unwrap().shape(), &[5, 4]);
        let bad = random(&[2, 4], &mut rng);
        assert!(gcn_forward(&bad, None, &x, &chain(5)).is_err());
    }

    #[test]
    fn gat_isolated_node_attends_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(&[1, 3], &mut rng);
        let w = random(&[4, 3, 2], &mut rng);
        let a = random(&[4, 4], &mut rng);
        let adj = Adjacency::from_edges(1, &[]).unwrap();
        let (_, att) = gat_forward_with_attention(&w, &a, None, &x, &adj, 4).unwrap();
        for head in &att {
            assert_eq!(head[0], vec![(0, 1.0)]);
        }
    }

    #[test]
    fn gat_rows_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..8 {
            let x = random(&[n, 5], &mut rng).map(|v| v * 4.0);
            let w = random(&[4, 5, 3], &mut rng);
            let a = random(&[4, 6], &mut rng).map(|v| v * 5.0);
            let (out, att) = gat_forward_with_attention(&w, &a, None, &x, &chain(n), 4).unwrap();
            assert_eq!(out.shape(), &[n, 3]);
            for head in &att {
                for row in head {
                    let s: f64 = row.iter().map(|(_, w)| w).sum();
                    assert!((s - 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn gat_zero_attention_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(&[4, 3], &mut rng);
        let w = random(&[4, 3, 2], &mut rng);
        let a = Tensor::zeros(&[4, 4]);
        let (_, att) = gat_forward_with_attention(&w, &a, None, &x, &chain(4), 4).unwrap();
        // interior nodes have two neighbours plus self
        for (_, w) in &att[0][1] {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        for (_, w) in &att[0][0] {
            assert!((w - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gat_head_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(&[3, 3], &mut rng);
        let w = random(&[2, 3, 2], &mut rng);
        let a = random(&[2, 4], &mut rng);
        assert!(gat_forward(&w, &a, None, &x, &chain(3), 4).is_err());
    }

    #[test]
    fn pooling_full_ratio_is_identity_on_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random(&[6, 4], &mut rng);
        let p = random(&[4], &mut rng);
        let (_, g, keep) = topk_pool(&x, &chain(6), &p, 1.0).unwrap();
        assert_eq!(keep, (0..6).collect::<Vec<_>>());
        assert_eq!(g, chain(6));
    }

    #[test]
    fn pooling_keeps_at_least_one() {
        let x = Tensor::from_rows(&[vec![1.0]]).unwrap();
        let p = Tensor::new(vec![1], vec![1.0]).unwrap();
        let (px, _, keep) = topk_pool(&x, &chain(1), &p, 0.01).unwrap();
        assert_eq!(keep, vec![0]);
        assert_eq!(px.rows(), 1);
    }

    #[test]
    fn unpool_restores_zero_rows() {
        // 4 nodes, scores 0.9, -1, 2, 0.1 with p = (1): keep top 2 = nodes 0 and 2
        let x = Tensor::from_rows(&[vec![0.9], vec![-1.0], vec![2.0], vec![0.1]]).unwrap();
        let p = Tensor::new(vec![1], vec![1.0]).unwrap();
        let (px, _, keep) = topk_pool(&x, &chain(4), &p, 0.5).unwrap();
        assert_eq!(keep, vec![0, 2]);
        let gate0 = 0.9 / (1.0 + (-0.9f64).exp());
        let gate2 = 2.0 / (1.0 + (-2.0f64).exp());
        assert!((px.data()[0] - gate0).abs() < 1e-12);
        assert!((px.data()[1] - gate2).abs() < 1e-12);
        let up = unpool(&px, &keep, 4).unwrap();
        assert_eq!(up.data()[1], 0.0);
        assert_eq!(up.data()[3], 0.0);
        assert!((up.data()[0] - gate0).abs() < 1e-12);
        assert!((up.data()[2] - gate2).abs() < 1e-12);
    }

    #[test]
    fn unet_preserves_row_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [1usize, 2, 5, 16] {
            for depth in 1..=3 {
                let down: Vec<(Tensor, Tensor)> = (0..=depth)
                    .map(|i| (random(&[if i == 0 { 3 } else { 6 }, 6], &mut rng), random(&[6], &mut rng)))
                    .collect();
                let pools: Vec<Tensor> = (0..depth).map(|_| random(&[6], &mut rng)).collect();
                let up: Vec<(Tensor, Tensor)> = (0..depth).map(|_| (random(&[6, 6], &mut rng), random(&[6], &mut rng))).collect();
                let params = UnetParams {
                    down: down.iter().map(|(w, b)| (w, b)).collect(),
                    pools: pools.iter().collect(),
                    up: up.iter().map(|(w, b)| (w, b)).collect(),
                };
                let x = random(&[n, 3], &mut rng);
                let out = graph_unet_forward(&params, &x, &chain(n), depth, 0.5).unwrap();
                assert_eq!(out.shape(), &[n, 6]);
                assert!(out.is_finite());
            }
        }
    }

    #[test]
    fn adjacency_rejects_bad_edges() {
        assert!(Adjacency::from_edges(2, &[(0, 2)]).is_err());
    }
}
