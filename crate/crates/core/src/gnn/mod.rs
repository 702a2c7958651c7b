//! Forward-only graph neural networks used by the neuroevolution species.
//!
//! Every network follows the same six stages: a graph layer (GCN or
//! Graph U-Net), SELU, multi-head graph attention, SELU, a linear layer, SELU.
//! There is no autodiff; parameters only change through evolution.

mod layers;
mod model;
mod tensor;

pub use layers::{
    gat_forward, gat_forward_with_attention, gcn_forward, graph_unet_forward, selu, selu_scalar,
    softmax, topk_pool, unpool, Adjacency, AttentionWeights, UnetParams, SELU_ALPHA, SELU_LAMBDA,
};
pub use model::{gnn_infer, gnn_infer_features, GnnArch, GnnGenome, GraphLayerKind, NamedTensor};
pub use tensor::Tensor;

/// Node features, one row per quantizer node.
pub type NodeFeatureMatrix = Tensor;
