use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Architecture, BatchPlan, ModelParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::numeric::{dot, sigmoid, AdamConfig, AdamState, Matrix};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Positive edges per mini-batch.
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub learning_rate: f64,
    /// Derived from the run's master seed, never read from configuration.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 256,
            negatives_per_positive: 1,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.negatives_per_positive == 0 {
            return Err(Error::Config(
                "epochs, batch_size and negatives_per_positive must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean edge loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Binary cross-entropy of the logistic edge score `z_u · z_v`.
pub fn edge_loss(z_u: &[f64], z_v: &[f64], positive: bool) -> f64 {
    let s = dot(z_u, z_v);
    // -log(sigmoid(s)) and -log(1 - sigmoid(s)), written as softplus.
    if positive {
        softplus(-s)
    } else {
        softplus(s)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Trains a fresh model on link prediction over the graph's own edges.
///
/// Each positive edge is paired with `negatives_per_positive` uniformly drawn
/// non-edges sharing its first endpoint. Edges are visited in canonical order
/// shuffled by the seed, so results do not depend on input edge order.
pub fn train_unsupervised(
    graph: &Graph,
    features: &Matrix,
    arch: &Architecture,
    cfg: &TrainConfig,
) -> Result<(ModelParams, TrainReport)> {
    cfg.validate()?;
    let edges = graph.edges();
    if edges.is_empty() {
        return Err(Error::Input("cannot train on a graph with no edges".into()));
    }
    let mut init_rng = seeds::stream(cfg.seed, "init");
    let mut shuffle_rng = seeds::stream(cfg.seed, "shuffle");
    let mut sample_rng = seeds::stream(cfg.seed, "sample");
    let mut negative_rng = seeds::stream(cfg.seed, "negatives");
    let mut order_rng = seeds::stream(cfg.seed, "order");

    let mut params = ModelParams::init(arch, features.cols(), &mut init_rng)?;
    let mut adam = AdamState::new(
        &params,
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
    );

    let mut order = edges.clone();
    let mut report = TrainReport::default();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut count = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut pairs: Vec<(NodeId, NodeId, bool)> =
                Vec::with_capacity(batch.len() * (1 + cfg.negatives_per_positive));
            for &(u, v) in batch {
                pairs.push((u, v, true));
                for _ in 0..cfg.negatives_per_positive {
                    if let Some(w) = draw_non_neighbor(graph, u, &mut negative_rng) {
                        pairs.push((u, w, false));
                    }
                }
            }
            let targets: Vec<NodeId> = pairs.iter().flat_map(|&(a, b, _)| [a, b]).collect();
            let plan = BatchPlan::sample(graph, &targets, &params, &mut sample_rng);
            let fwd = params.forward_batch(graph, features, &plan, Some(&mut order_rng))?;
            let index = &plan.index[plan.levels.len() - 1];

            let scale = 1.0 / pairs.len() as f64;
            let mut grad = Matrix::zeros(fwd.embeddings.rows(), fwd.embeddings.cols());
            let mut batch_loss = 0.0;
            for &(a, b, positive) in &pairs {
                let (ra, rb) = (index[a], index[b]);
                let (za, zb) = (fwd.embeddings.row(ra), fwd.embeddings.row(rb));
                batch_loss += edge_loss(za, zb, positive);
                let p = sigmoid(dot(za, zb));
                let ds = (if positive { p - 1.0 } else { p }) * scale;
                let (za, zb) = (za.to_vec(), zb.to_vec());
                grad.row_mut(ra)
                    .iter_mut()
                    .zip(&zb)
                    .for_each(|(g, z)| *g += ds * z);
                grad.row_mut(rb)
                    .iter_mut()
                    .zip(&za)
                    .for_each(|(g, z)| *g += ds * z);
            }
            if !batch_loss.is_finite() {
                return Err(Error::Numeric("training loss became non-finite".into()));
            }
            total += batch_loss;
            count += pairs.len();

            let grads = params.backward_batch(&plan, &fwd, &grad);
            adam.step(&mut params, &grads);
        }
        report.epoch_losses.push(total / count as f64);
    }
    Ok((params, report))
}

/// Uniform node that is neither `u` nor adjacent to it; `None` if a bounded
/// number of draws all hit neighbours.
pub(crate) fn draw_non_neighbor<R: Rng + ?Sized>(
    graph: &Graph,
    u: NodeId,
    rng: &mut R,
) -> Option<NodeId> {
    let n = graph.num_nodes();
    if graph.degree(u) + 1 >= n {
        return None;
    }
    (0..64)
        .map(|_| rng.random_range(0..n))
        .find(|&w| w != u && !graph.has_edge(u, w))
}
