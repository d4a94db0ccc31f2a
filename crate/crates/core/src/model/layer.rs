use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aggregators::{AggCache, Aggregator, AggregatorKind};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::numeric::{concat, l2_normalize, l2_normalize_backward, relu, Dense, Matrix, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    /// Aggregate within each connected component of the sampled
    /// neighbourhood, transform, then aggregate across components.
    ComBSage,
    /// Plain aggregate-then-update over the whole sampled neighbourhood.
    GraphSage,
}

/// One message-passing layer and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    ComBSage {
        in_dim: usize,
        out_dim: usize,
        /// Per-component transform `W_I` on `[h_v | AGG_C(component)]`.
        inner: Dense,
        /// Update transform `W_C` on `[h_v | AGG_I(component messages)]`.
        combine: Dense,
        agg_c: Aggregator,
        agg_i: Aggregator,
    },
    GraphSage {
        in_dim: usize,
        out_dim: usize,
        update: Dense,
        agg: Aggregator,
    },
}

impl Layer {
    pub fn combsage<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        agg_c: AggregatorKind,
        agg_i: AggregatorKind,
        rng: &mut R,
    ) -> Self {
        let agg_c = Aggregator::new(agg_c, in_dim, out_dim, rng);
        let inner = Dense::glorot(in_dim + agg_c.output_dim(in_dim), out_dim, rng);
        let agg_i = Aggregator::new(agg_i, out_dim, out_dim, rng);
        let combine = Dense::glorot(in_dim + agg_i.output_dim(out_dim), out_dim, rng);
        Layer::ComBSage {
            in_dim,
            out_dim,
            inner,
            combine,
            agg_c,
            agg_i,
        }
    }

    pub fn graphsage<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        agg: AggregatorKind,
        rng: &mut R,
    ) -> Self {
        let agg = Aggregator::new(agg, in_dim, out_dim, rng);
        let update = Dense::glorot(in_dim + agg.output_dim(in_dim), out_dim, rng);
        Layer::GraphSage {
            in_dim,
            out_dim,
            update,
            agg,
        }
    }

    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::ComBSage { .. } => LayerKind::ComBSage,
            Layer::GraphSage { .. } => LayerKind::GraphSage,
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            Layer::ComBSage { in_dim, .. } | Layer::GraphSage { in_dim, .. } => *in_dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Layer::ComBSage { out_dim, .. } | Layer::GraphSage { out_dim, .. } => *out_dim,
        }
    }

    fn uses_order(&self) -> bool {
        match self {
            Layer::ComBSage { agg_c, agg_i, .. } => {
                agg_c.kind() == AggregatorKind::Lstm || agg_i.kind() == AggregatorKind::Lstm
            }
            Layer::GraphSage { agg, .. } => agg.kind() == AggregatorKind::Lstm,
        }
    }

    /// Computes the new representation of `v` from the previous layer's
    /// states and the sampled neighbours of `v`.
    ///
    /// `shuffle` randomises LSTM input order (training); `None` keeps node-id
    /// order for components and members (inference).
    pub fn forward_node<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        h_prev: &LevelView<'_>,
        v: NodeId,
        sampled: &[NodeId],
        mut shuffle: Option<&mut R>,
    ) -> Result<(Vec<f64>, NodeCache)> {
        let self_state = h_prev.get(v);
        if self_state.len() != self.in_dim() {
            return Err(Error::Shape(format!(
                "layer expects inputs of dim {}, got {}",
                self.in_dim(),
                self_state.len()
            )));
        }
        let shuffle_ref = if self.uses_order() {
            shuffle.as_deref_mut()
        } else {
            None
        };
        let (message, detail, combine) = match self {
            Layer::ComBSage {
                out_dim,
                inner,
                combine,
                agg_c,
                agg_i,
                ..
            } => {
                let components = graph.components_of_sorted(sampled).into_inner();
                if components.is_empty() {
                    let zero = vec![0.0; agg_i.output_dim(*out_dim)];
                    (
                        zero,
                        Detail::ComBSage {
                            components: Vec::new(),
                            agg_i: None,
                        },
                        combine,
                    )
                } else {
                    let mut rng = shuffle_ref;
                    let mut comps = Vec::with_capacity(components.len());
                    let mut transformed = Vec::with_capacity(components.len());
                    for members in components {
                        let msgs: Vec<&[f64]> = members.iter().map(|&u| h_prev.get(u)).collect();
                        let (m, agg) = agg_c.forward(&msgs, rng.as_deref_mut())?;
                        let inner_in = concat(self_state, &m);
                        let pre = inner.forward(&inner_in);
                        transformed.push(relu(&pre));
                        comps.push(ComponentCache {
                            members,
                            agg,
                            inner_in,
                            pre,
                        });
                    }
                    let refs: Vec<&[f64]> = transformed.iter().map(Vec::as_slice).collect();
                    let (a, agg_cache) = agg_i.forward(&refs, rng)?;
                    (
                        a,
                        Detail::ComBSage {
                            components: comps,
                            agg_i: Some(agg_cache),
                        },
                        combine,
                    )
                }
            }
            Layer::GraphSage {
                update,
                agg,
                in_dim,
                ..
            } => {
                if sampled.is_empty() {
                    let zero = vec![0.0; agg.output_dim(*in_dim)];
                    (
                        zero,
                        Detail::GraphSage {
                            neighbors: Vec::new(),
                            agg: None,
                        },
                        update,
                    )
                } else {
                    let msgs: Vec<&[f64]> = sampled.iter().map(|&u| h_prev.get(u)).collect();
                    let (m, cache) = agg.forward(&msgs, shuffle_ref)?;
                    (
                        m,
                        Detail::GraphSage {
                            neighbors: sampled.to_vec(),
                            agg: Some(cache),
                        },
                        update,
                    )
                }
            }
        };
        let combine_in = concat(self_state, &message);
        let pre = combine.forward(&combine_in);
        let activated = relu(&pre);
        let out = l2_normalize(&activated);
        Ok((
            out,
            NodeCache {
                v,
                detail,
                combine_in,
                pre,
                activated,
            },
        ))
    }

    /// Backward pass for one node. Parameter gradients go into `grads`
    /// (same shape as `self`); gradients on previous-layer states are handed
    /// to `grad_prev(node, gradient)`.
    pub fn backward_node<F>(
        &self,
        cache: &NodeCache,
        grad_out: &[f64],
        grads: &mut Layer,
        mut grad_prev: F,
    ) where
        F: FnMut(NodeId, &[f64]),
    {
        let d_act = l2_normalize_backward(&cache.activated, grad_out);
        if d_act.iter().all(|x| *x == 0.0) {
            return;
        }
        let d_pre: Vec<f64> = d_act
            .iter()
            .zip(&cache.pre)
            .map(|(g, p)| if *p > 0.0 { *g } else { 0.0 })
            .collect();
        let in_dim = self.in_dim();
        match (self, grads, &cache.detail) {
            (
                Layer::ComBSage {
                    inner,
                    combine,
                    agg_c,
                    agg_i,
                    ..
                },
                Layer::ComBSage {
                    inner: g_inner,
                    combine: g_combine,
                    agg_c: g_agg_c,
                    agg_i: g_agg_i,
                    ..
                },
                Detail::ComBSage {
                    components,
                    agg_i: agg_i_cache,
                },
            ) => {
                let d_cat = combine.backward(&cache.combine_in, &d_pre, g_combine);
                let mut d_self = d_cat[..in_dim].to_vec();
                if let Some(agg_i_cache) = agg_i_cache {
                    let d_msgs = agg_i.backward(agg_i_cache, &d_cat[in_dim..], g_agg_i);
                    for (comp, d_t) in components.iter().zip(d_msgs) {
                        let d_pre_c: Vec<f64> = d_t
                            .iter()
                            .zip(&comp.pre)
                            .map(|(g, p)| if *p > 0.0 { *g } else { 0.0 })
                            .collect();
                        if d_pre_c.iter().all(|x| *x == 0.0) {
                            continue;
                        }
                        let d_inner = inner.backward(&comp.inner_in, &d_pre_c, g_inner);
                        d_self
                            .iter_mut()
                            .zip(&d_inner[..in_dim])
                            .for_each(|(a, b)| *a += b);
                        let d_members = agg_c.backward(&comp.agg, &d_inner[in_dim..], g_agg_c);
                        for (&u, d_u) in comp.members.iter().zip(&d_members) {
                            grad_prev(u, d_u);
                        }
                    }
                }
                grad_prev(cache.v, &d_self);
            }
            (
                Layer::GraphSage { update, agg, .. },
                Layer::GraphSage {
                    update: g_update,
                    agg: g_agg,
                    ..
                },
                Detail::GraphSage {
                    neighbors,
                    agg: agg_cache,
                },
            ) => {
                let d_cat = update.backward(&cache.combine_in, &d_pre, g_update);
                if let Some(agg_cache) = agg_cache {
                    let d_msgs = agg.backward(agg_cache, &d_cat[in_dim..], g_agg);
                    for (&u, d_u) in neighbors.iter().zip(&d_msgs) {
                        grad_prev(u, d_u);
                    }
                }
                grad_prev(cache.v, &d_cat[..in_dim]);
            }
            _ => panic!("layer, gradient buffer and cache must be the same variant"),
        }
    }
}

impl ParamSet for Layer {
    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            Layer::ComBSage {
                inner,
                combine,
                agg_c,
                agg_i,
                ..
            } => [
                inner.tensors(),
                combine.tensors(),
                agg_c.tensors(),
                agg_i.tensors(),
            ]
            .concat(),
            Layer::GraphSage { update, agg, .. } => [update.tensors(), agg.tensors()].concat(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::ComBSage {
                inner,
                combine,
                agg_c,
                agg_i,
                ..
            } => {
                let mut out = inner.tensors_mut();
                out.extend(combine.tensors_mut());
                out.extend(agg_c.tensors_mut());
                out.extend(agg_i.tensors_mut());
                out
            }
            Layer::GraphSage { update, agg, .. } => {
                let mut out = update.tensors_mut();
                out.extend(agg.tensors_mut());
                out
            }
        }
    }
}

/// Read access to one level of node states. Without an index, row `v` of
/// the matrix is node `v`.
#[derive(Debug, Clone, Copy)]
pub struct LevelView<'a> {
    pub states: &'a Matrix,
    pub index: Option<&'a [usize]>,
}

impl<'a> LevelView<'a> {
    pub fn dense(states: &'a Matrix) -> Self {
        LevelView {
            states,
            index: None,
        }
    }

    pub fn get(&self, v: NodeId) -> &'a [f64] {
        match self.index {
            None => self.states.row(v),
            Some(index) => self.states.row(index[v]),
        }
    }
}

#[derive(Debug, Clone)]
struct ComponentCache {
    members: Vec<NodeId>,
    agg: AggCache,
    inner_in: Vec<f64>,
    pre: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Detail {
    ComBSage {
        components: Vec<ComponentCache>,
        agg_i: Option<AggCache>,
    },
    GraphSage {
        neighbors: Vec<NodeId>,
        agg: Option<AggCache>,
    },
}

/// Forward-pass record for one node in one layer.
#[derive(Debug, Clone)]
pub struct NodeCache {
    v: NodeId,
    detail: Detail,
    combine_in: Vec<f64>,
    pre: Vec<f64>,
    activated: Vec<f64>,
}

impl NodeCache {
    /// How many per-component inner transforms ran (ComBSAGE), or how many
    /// neighbour messages were aggregated (GraphSAGE).
    pub fn inner_transforms(&self) -> usize {
        match &self.detail {
            Detail::ComBSage { components, .. } => components.len(),
            Detail::GraphSage { neighbors, .. } => neighbors.len(),
        }
    }

    /// Member lists of the components that were aggregated (ComBSAGE only).
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        match &self.detail {
            Detail::ComBSage { components, .. } => {
                components.iter().map(|c| c.members.clone()).collect()
            }
            Detail::GraphSage { .. } => Vec::new(),
        }
    }
}

fn sorted_subset(graph: &Graph, v: NodeId, sampled: &[NodeId]) -> Result<Vec<NodeId>> {
    let mut s = sampled.to_vec();
    s.sort_unstable();
    s.dedup();
    let neighbors = graph.neighbors(v);
    if let Some(bad) = s.iter().find(|u| neighbors.binary_search(u).is_err()) {
        return Err(Error::Precondition(format!(
            "node {bad} is not a neighbour of {v}"
        )));
    }
    Ok(s)
}

/// One ComBSAGE update for node `v` in inference order.
pub fn combsage_layer(
    graph: &Graph,
    h_prev: &Matrix,
    layer: &Layer,
    v: NodeId,
    sampled: &[NodeId],
) -> Result<Vec<f64>> {
    if layer.kind() != LayerKind::ComBSage {
        return Err(Error::Input("expected a ComBSAGE layer".into()));
    }
    let s = sorted_subset(graph, v, sampled)?;
    layer
        .forward_node(
            graph,
            &LevelView::dense(h_prev),
            v,
            &s,
            None::<&mut rand_chacha::ChaCha8Rng>,
        )
        .map(|(out, _)| out)
}

/// One GraphSAGE update for node `v` in inference order.
pub fn graphsage_layer(
    graph: &Graph,
    h_prev: &Matrix,
    layer: &Layer,
    v: NodeId,
    sampled: &[NodeId],
) -> Result<Vec<f64>> {
    if layer.kind() != LayerKind::GraphSage {
        return Err(Error::Input("expected a GraphSAGE layer".into()));
    }
    let s = sorted_subset(graph, v, sampled)?;
    layer
        .forward_node(
            graph,
            &LevelView::dense(h_prev),
            v,
            &s,
            None::<&mut rand_chacha::ChaCha8Rng>,
        )
        .map(|(out, _)| out)
}
