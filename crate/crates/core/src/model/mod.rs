//! K-layer message-passing models (ComBSAGE and GraphSAGE), mini-batch
//! computation plans, and unsupervised link-prediction training.

mod checkpoint;
mod layer;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use layer::{combsage_layer, graphsage_layer, Layer, LayerKind, LevelView, NodeCache};
pub use train::{edge_loss, train_unsupervised, TrainConfig, TrainReport};

use crate::aggregators::AggregatorKind;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::numeric::{Matrix, ParamSet};

/// Shape of a model before its weights exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub layer: LayerKind,
    /// Within-component aggregator for ComBSAGE; the only aggregator for
    /// GraphSAGE.
    pub agg_c: AggregatorKind,
    /// Across-component aggregator (ComBSAGE only).
    pub agg_i: AggregatorKind,
    /// Output dimension of each layer.
    pub hidden_dims: Vec<usize>,
    /// Neighbour sample size per hop: `fanouts[0]` is the targets' own
    /// neighbourhood (used by the last layer), `fanouts[1]` the next hop out.
    pub fanouts: Vec<usize>,
    pub jumping_knowledge: bool,
}

impl Architecture {
    /// Two-layer ComBSAGE with max-pool within components, LSTM across
    /// components, and jumping knowledge.
    pub fn combsage() -> Self {
        Architecture {
            layer: LayerKind::ComBSage,
            agg_c: AggregatorKind::MaxPool,
            agg_i: AggregatorKind::Lstm,
            hidden_dims: vec![128, 128],
            fanouts: vec![25, 10],
            jumping_knowledge: true,
        }
    }

    pub fn graphsage(agg: AggregatorKind) -> Self {
        Architecture {
            layer: LayerKind::GraphSage,
            agg_c: agg,
            agg_i: agg,
            hidden_dims: vec![128, 128],
            fanouts: vec![25, 10],
            jumping_knowledge: false,
        }
    }

    pub fn with_hidden_dims(mut self, dims: Vec<usize>) -> Self {
        self.hidden_dims = dims;
        self
    }

    pub fn with_fanouts(mut self, fanouts: Vec<usize>) -> Self {
        self.fanouts = fanouts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dims.is_empty() {
            return Err(Error::Config("a model needs at least one layer".into()));
        }
        if self.fanouts.len() != self.hidden_dims.len() {
            return Err(Error::Config(format!(
                "{} fanouts given for {} layers",
                self.fanouts.len(),
                self.hidden_dims.len()
            )));
        }
        if self.hidden_dims.contains(&0) || self.fanouts.contains(&0) {
            return Err(Error::Config(
                "layer dims and fanouts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Weights for all K layers plus the sampling configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub layers: Vec<Layer>,
    pub jumping_knowledge: bool,
    pub fanouts: Vec<usize>,
}

impl ModelParams {
    pub fn init<R: Rng + ?Sized>(
        arch: &Architecture,
        input_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        arch.validate()?;
        let mut layers = Vec::with_capacity(arch.hidden_dims.len());
        let mut in_dim = input_dim;
        for &out_dim in &arch.hidden_dims {
            layers.push(match arch.layer {
                LayerKind::ComBSage => {
                    Layer::combsage(in_dim, out_dim, arch.agg_c, arch.agg_i, rng)
                }
                LayerKind::GraphSage => Layer::graphsage(in_dim, out_dim, arch.agg_c, rng),
            });
            in_dim = out_dim;
        }
        Ok(ModelParams {
            layers,
            jumping_knowledge: arch.jumping_knowledge,
            fanouts: arch.fanouts.clone(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn embed_dim(&self) -> usize {
        if self.jumping_knowledge {
            self.layers.iter().map(Layer::out_dim).sum()
        } else {
            self.layers.last().map_or(0, Layer::out_dim)
        }
    }

    fn fanout_for_layer(&self, k: usize) -> usize {
        // Layer k (1-based) of K samples hop K - k + 1.
        self.fanouts[self.layers.len() - k]
    }

    /// Forward pass over a computation plan. With `shuffle`, LSTM
    /// aggregators see randomly ordered inputs (training).
    pub fn forward_batch<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        features: &Matrix,
        plan: &BatchPlan,
        mut shuffle: Option<&mut R>,
    ) -> Result<BatchForward> {
        if features.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "model expects {}-dim features, got {}",
                self.input_dim(),
                features.cols()
            )));
        }
        if features.rows() != graph.num_nodes() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                graph.num_nodes()
            )));
        }
        let k_layers = self.layers.len();
        let mut states: Vec<Matrix> = Vec::with_capacity(k_layers);
        let mut caches: Vec<Vec<NodeCache>> = Vec::with_capacity(k_layers);
        for k in 1..=k_layers {
            let layer = &self.layers[k - 1];
            let prev = if k == 1 {
                LevelView::dense(features)
            } else {
                LevelView {
                    states: &states[k - 2],
                    index: Some(&plan.index[k - 1]),
                }
            };
            let nodes = &plan.levels[k];
            let mut out = Matrix::zeros(nodes.len(), layer.out_dim());
            let mut level_caches = Vec::with_capacity(nodes.len());
            for (row, &v) in nodes.iter().enumerate() {
                let (h, cache) = layer.forward_node(
                    graph,
                    &prev,
                    v,
                    &plan.samples[k - 1][row],
                    shuffle.as_deref_mut(),
                )?;
                out.row_mut(row).copy_from_slice(&h);
                level_caches.push(cache);
            }
            states.push(out);
            caches.push(level_caches);
        }

        let targets = &plan.levels[k_layers];
        let mut embeddings = Matrix::zeros(targets.len(), self.embed_dim());
        for (row, &v) in targets.iter().enumerate() {
            let dst = embeddings.row_mut(row);
            if self.jumping_knowledge {
                let mut offset = 0;
                for k in 1..=k_layers {
                    let h = states[k - 1].row(plan.index[k][v]);
                    dst[offset..offset + h.len()].copy_from_slice(h);
                    offset += h.len();
                }
            } else {
                dst.copy_from_slice(states[k_layers - 1].row(row));
            }
        }
        Ok(BatchForward {
            states,
            caches,
            embeddings,
        })
    }

    /// Backpropagates `grad_embeddings` (one row per plan target) into
    /// parameter gradients.
    pub fn backward_batch(
        &self,
        plan: &BatchPlan,
        forward: &BatchForward,
        grad_embeddings: &Matrix,
    ) -> ModelParams {
        let k_layers = self.layers.len();
        let mut grads = self.zeros_like();
        let mut d_states: Vec<Matrix> = forward
            .states
            .iter()
            .map(|s| Matrix::zeros(s.rows(), s.cols()))
            .collect();

        let targets = &plan.levels[k_layers];
        for (row, &v) in targets.iter().enumerate() {
            let g = grad_embeddings.row(row);
            if self.jumping_knowledge {
                let mut offset = 0;
                for k in 1..=k_layers {
                    let width = self.layers[k - 1].out_dim();
                    let r = plan.index[k][v];
                    add_into(d_states[k - 1].row_mut(r), &g[offset..offset + width]);
                    offset += width;
                }
            } else {
                add_into(d_states[k_layers - 1].row_mut(row), g);
            }
        }

        for k in (1..=k_layers).rev() {
            let layer = &self.layers[k - 1];
            let (lower, upper) = d_states.split_at_mut(k - 1);
            let d_here = &upper[0];
            let index_prev = &plan.index[k - 1];
            for (row, cache) in forward.caches[k - 1].iter().enumerate() {
                let g = d_here.row(row);
                if g.iter().all(|x| *x == 0.0) {
                    continue;
                }
                match lower.last_mut() {
                    Some(d_prev) => {
                        layer.backward_node(cache, g, &mut grads.layers[k - 1], |u, d| {
                            add_into(d_prev.row_mut(index_prev[u]), d)
                        })
                    }
                    None => layer.backward_node(cache, g, &mut grads.layers[k - 1], |_, _| {}),
                }
            }
        }
        grads
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
}

impl ParamSet for ModelParams {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers.tensors()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.tensors_mut()
    }
}

/// Which nodes each layer must compute, and the neighbour sample each of
/// them aggregates. `levels[0]` holds input nodes, `levels[K]` the targets.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub levels: Vec<Vec<NodeId>>,
    /// `index[k][v]` is the row of node `v` in `levels[k]`, or `usize::MAX`.
    pub index: Vec<Vec<usize>>,
    /// `samples[k-1][row]` is the sorted neighbour sample used by layer `k`
    /// for node `levels[k][row]`.
    pub samples: Vec<Vec<Vec<NodeId>>>,
}

impl BatchPlan {
    /// Samples the computation tree for `targets`, hop by hop outward.
    pub fn sample<R: Rng + ?Sized>(
        graph: &Graph,
        targets: &[NodeId],
        params: &ModelParams,
        rng: &mut R,
    ) -> Self {
        let n = graph.num_nodes();
        let k_layers = params.layers.len();
        let mut levels = vec![Vec::new(); k_layers + 1];
        let mut samples = vec![Vec::new(); k_layers];
        let mut top: Vec<NodeId> = targets.to_vec();
        top.sort_unstable();
        top.dedup();
        levels[k_layers] = top;
        for k in (1..=k_layers).rev() {
            let fanout = params.fanout_for_layer(k);
            let mut mark = vec![false; n];
            let mut layer_samples = Vec::with_capacity(levels[k].len());
            for &v in &levels[k] {
                mark[v] = true;
                let s = graph.sample_neighbors(v, fanout, rng);
                for &u in &s {
                    mark[u] = true;
                }
                layer_samples.push(s);
            }
            samples[k - 1] = layer_samples;
            levels[k - 1] = (0..n).filter(|&v| mark[v]).collect();
        }
        let index = levels.iter().map(|l| index_of(l, n)).collect();
        BatchPlan {
            levels,
            index,
            samples,
        }
    }

    /// Every node at every level; neighbourhoods sampled with the model's
    /// fanouts (the full neighbourhood whenever the fanout covers it).
    pub fn full<R: Rng + ?Sized>(graph: &Graph, params: &ModelParams, rng: &mut R) -> Self {
        let n = graph.num_nodes();
        let k_layers = params.layers.len();
        let all: Vec<NodeId> = (0..n).collect();
        let samples = (1..=k_layers)
            .map(|k| {
                let fanout = params.fanout_for_layer(k);
                (0..n)
                    .map(|v| graph.sample_neighbors(v, fanout, rng))
                    .collect()
            })
            .collect();
        let identity: Vec<usize> = (0..n).collect();
        BatchPlan {
            levels: vec![all; k_layers + 1],
            index: vec![identity; k_layers + 1],
            samples,
        }
    }

    pub fn targets(&self) -> &[NodeId] {
        self.levels.last().expect("plan has at least one level")
    }
}

fn index_of(nodes: &[NodeId], n: usize) -> Vec<usize> {
    let mut index = vec![usize::MAX; n];
    for (row, &v) in nodes.iter().enumerate() {
        index[v] = row;
    }
    index
}

/// Saved activations from [`ModelParams::forward_batch`].
#[derive(Debug, Clone)]
pub struct BatchForward {
    /// `states[k-1]` holds layer-k outputs in `levels[k]` order.
    pub states: Vec<Matrix>,
    pub caches: Vec<Vec<NodeCache>>,
    /// One row per plan target.
    pub embeddings: Matrix,
}

/// Inference-mode embeddings for every node: neighbourhoods are sampled
/// with `rng` at the model's fanouts and LSTM aggregators read their inputs
/// in node-id order.
pub fn model_forward<R: Rng + ?Sized>(
    graph: &Graph,
    features: &Matrix,
    params: &ModelParams,
    rng: &mut R,
) -> Result<Matrix> {
    let plan = BatchPlan::full(graph, params, rng);
    let fwd = params.forward_batch(graph, features, &plan, None::<&mut R>)?;
    if !fwd.embeddings.is_finite() {
        return Err(Error::Numeric("non-finite embedding produced".into()));
    }
    Ok(fwd.embeddings)
}

/// Content-only embeddings: the features themselves.
pub fn embed_features_only(features: &Matrix) -> Matrix {
    features.clone()
}
