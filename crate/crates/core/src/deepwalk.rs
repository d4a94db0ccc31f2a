//! Structure-only node embeddings: truncated uniform random walks fed to a
//! skip-gram model trained with negative sampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::numeric::{dot, sigmoid, Matrix};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub embed_dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting SGD step size, decayed linearly towards zero.
    pub learning_rate: f64,
    /// Derived from the run's master seed, never read from configuration.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 10,
            walk_length: 40,
            window: 5,
            embed_dim: 128,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 2 || self.window < 1 {
            return Err(Error::Config(
                "walk_length must be >= 2 and window >= 1".into(),
            ));
        }
        if self.walks_per_node == 0 || self.embed_dim == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "walks_per_node, embed_dim and epochs must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// `walks_per_node` passes over all nodes (visited in a shuffled order per
/// pass), each starting one walk of up to `walk_length` nodes. A walk from an
/// isolated node has length one.
pub fn generate_walks<R: Rng + ?Sized>(
    graph: &Graph,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Vec<Vec<NodeId>> {
    let n = graph.num_nodes();
    let mut walks = Vec::with_capacity(n * cfg.walks_per_node);
    let mut starts: Vec<NodeId> = (0..n).collect();
    for _ in 0..cfg.walks_per_node {
        starts.shuffle(rng);
        for &start in &starts {
            let mut walk = Vec::with_capacity(cfg.walk_length);
            walk.push(start);
            let mut here = start;
            while walk.len() < cfg.walk_length {
                let next = graph.neighbors(here);
                if next.is_empty() {
                    break;
                }
                here = next[rng.random_range(0..next.len())];
                walk.push(here);
            }
            walks.push(walk);
        }
    }
    walks
}

/// Gradients of the negative-sampling loss for one (center, context) pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkipGramGrad {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// `-log σ(c·o) - Σ_k log σ(-c·n_k)` and its gradients, where `c` is the
/// center's input vector, `o` the context's output vector and `n_k` the
/// sampled negatives' output vectors.
pub fn skipgram_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> (f64, SkipGramGrad) {
    let mut grad = SkipGramGrad {
        center: vec![0.0; center.len()],
        context: vec![0.0; context.len()],
        negatives: Vec::with_capacity(negatives.len()),
    };
    let mut loss = 0.0;
    let s = dot(center, context);
    loss += softplus(-s);
    let g = sigmoid(s) - 1.0;
    for j in 0..center.len() {
        grad.center[j] += g * context[j];
        grad.context[j] = g * center[j];
    }
    for neg in negatives {
        let s = dot(center, neg);
        loss += softplus(s);
        let g = sigmoid(s);
        for j in 0..center.len() {
            grad.center[j] += g * neg[j];
        }
        grad.negatives.push(center.iter().map(|c| g * c).collect());
    }
    (loss, grad)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Trains skip-gram with negative sampling over every (center, context) pair
/// within `window` positions. Negatives come from the walk-occurrence
/// unigram distribution raised to the 3/4 power. Returns the input vectors.
pub fn skipgram_train<R: Rng + ?Sized>(
    walks: &[Vec<NodeId>],
    num_nodes: usize,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Result<Matrix> {
    cfg.validate()?;
    if walks.is_empty() {
        return Err(Error::Precondition("no walks to train on".into()));
    }
    let d = cfg.embed_dim;
    let mut counts = vec![0usize; num_nodes];
    for w in walks {
        for &v in w {
            if v >= num_nodes {
                return Err(Error::Input(format!(
                    "walk visits node {v} outside 0..{num_nodes}"
                )));
            }
            counts[v] += 1;
        }
    }
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let noise = WeightedIndex::new(&weights)
        .map_err(|e| Error::Input(format!("negative sampling table: {e}")))?;

    let init = 0.5 / d as f64;
    let mut input = Matrix::new(
        num_nodes,
        d,
        (0..num_nodes * d)
            .map(|_| rng.random_range(-init..init))
            .collect(),
    )?;
    let mut output = Matrix::zeros(num_nodes, d);

    let total_tokens = (cfg.epochs * walks.iter().map(Vec::len).sum::<usize>()) as f64;
    let mut processed = 0usize;
    let mut negs: Vec<NodeId> = Vec::with_capacity(cfg.negatives);
    for _ in 0..cfg.epochs {
        for walk in walks {
            for (i, &center) in walk.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - processed as f64 / total_tokens).max(1e-4);
                processed += 1;
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window + 1).min(walk.len());
                for (j, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let n = noise.sample(rng);
                        if n != context {
                            negs.push(n);
                        }
                    }
                    let neg_rows: Vec<&[f64]> = negs.iter().map(|&n| output.row(n)).collect();
                    let (_, grad) =
                        skipgram_loss(input.row(center), output.row(context), &neg_rows);
                    axpy(output.row_mut(context), -lr, &grad.context);
                    for (&n, g) in negs.iter().zip(&grad.negatives) {
                        axpy(output.row_mut(n), -lr, g);
                    }
                    axpy(input.row_mut(center), -lr, &grad.center);
                }
            }
        }
    }
    if !input.is_finite() {
        return Err(Error::Numeric(
            "skip-gram embeddings became non-finite".into(),
        ));
    }
    Ok(input)
}

fn axpy(dst: &mut [f64], alpha: f64, x: &[f64]) {
    dst.iter_mut().zip(x).for_each(|(d, v)| *d += alpha * v);
}

/// Walks plus skip-gram training, with both random streams derived from
/// `cfg.seed`.
pub fn deepwalk(graph: &Graph, cfg: &WalkConfig) -> Result<Matrix> {
    cfg.validate()?;
    let mut walk_rng = seeds::stream(cfg.seed, "deepwalk/walks");
    let mut train_rng = seeds::stream(cfg.seed, "deepwalk/train");
    let walks = generate_walks(graph, cfg, &mut walk_rng);
    skipgram_train(&walks, graph.num_nodes(), cfg, &mut train_rng)
}
