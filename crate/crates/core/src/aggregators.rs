//! Neighbour-message aggregators shared by the GraphSAGE and ComBSAGE layers.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, relu, Dense, LstmCache, LstmParams, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKind {
    Mean,
    MaxPool,
    Lstm,
}

/// An aggregator together with its learned parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Aggregator {
    /// Elementwise mean.
    Mean,
    /// Elementwise max over `relu(W m + b)`.
    MaxPool { pool: Dense },
    /// Final hidden state of an LSTM run over the messages.
    Lstm { lstm: LstmParams },
}

/// Forward-pass state needed by [`Aggregator::backward`].
#[derive(Debug, Clone)]
pub enum AggCache {
    Mean {
        count: usize,
        dim: usize,
    },
    MaxPool {
        inputs: Vec<Vec<f64>>,
        pre: Vec<Vec<f64>>,
        argmax: Vec<usize>,
    },
    Lstm {
        order: Vec<usize>,
        cache: LstmCache,
    },
}

impl Aggregator {
    /// Fresh aggregator mapping `input_dim` messages to `output_dim` (ignored
    /// by `Mean`, whose output has the input's dimension).
    pub fn new<R: Rng + ?Sized>(
        kind: AggregatorKind,
        input_dim: usize,
        output_dim: usize,
        rng: &mut R,
    ) -> Self {
        match kind {
            AggregatorKind::Mean => Aggregator::Mean,
            AggregatorKind::MaxPool => Aggregator::MaxPool {
                pool: Dense::glorot(input_dim, output_dim, rng),
            },
            AggregatorKind::Lstm => Aggregator::Lstm {
                lstm: LstmParams::glorot(input_dim, output_dim, rng),
            },
        }
    }

    pub fn kind(&self) -> AggregatorKind {
        match self {
            Aggregator::Mean => AggregatorKind::Mean,
            Aggregator::MaxPool { .. } => AggregatorKind::MaxPool,
            Aggregator::Lstm { .. } => AggregatorKind::Lstm,
        }
    }

    pub fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            Aggregator::Mean => input_dim,
            Aggregator::MaxPool { pool } => pool.output_dim(),
            Aggregator::Lstm { lstm } => lstm.hidden_dim,
        }
    }

    /// Aggregates a non-empty list of equal-length messages.
    ///
    /// With `shuffle` set, the LSTM consumes the messages in a random order
    /// drawn from it; otherwise in the given order. `Mean` and `MaxPool`
    /// ignore the order entirely and are bitwise permutation invariant.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        messages: &[&[f64]],
        shuffle: Option<&mut R>,
    ) -> Result<(Vec<f64>, AggCache)> {
        let dim = check_messages(messages)?;
        match self {
            Aggregator::Mean => {
                let n = messages.len() as f64;
                let mut column = vec![0.0; messages.len()];
                let out = (0..dim)
                    .map(|d| {
                        for (c, m) in column.iter_mut().zip(messages) {
                            *c = m[d];
                        }
                        pairwise_sum(&mut column) / n
                    })
                    .collect();
                Ok((
                    out,
                    AggCache::Mean {
                        count: messages.len(),
                        dim,
                    },
                ))
            }
            Aggregator::MaxPool { pool } => {
                if pool.input_dim() != dim {
                    return Err(Error::Shape(format!(
                        "max-pool aggregator expects dim {}, got {dim}",
                        pool.input_dim()
                    )));
                }
                let pre: Vec<Vec<f64>> = messages.iter().map(|m| pool.forward(m)).collect();
                let activated: Vec<Vec<f64>> = pre.iter().map(|p| relu(p)).collect();
                let width = pool.output_dim();
                let mut out = vec![f64::NEG_INFINITY; width];
                let mut argmax = vec![0; width];
                for (k, a) in activated.iter().enumerate() {
                    for d in 0..width {
                        if a[d] > out[d] {
                            out[d] = a[d];
                            argmax[d] = k;
                        }
                    }
                }
                Ok((
                    out,
                    AggCache::MaxPool {
                        inputs: messages.iter().map(|m| m.to_vec()).collect(),
                        pre,
                        argmax,
                    },
                ))
            }
            Aggregator::Lstm { lstm } => {
                let mut order: Vec<usize> = (0..messages.len()).collect();
                if let Some(rng) = shuffle {
                    order.shuffle(rng);
                }
                let seq: Vec<&[f64]> = order.iter().map(|&i| messages[i]).collect();
                let (h, cache) = lstm.forward(&seq)?;
                Ok((h, AggCache::Lstm { order, cache }))
            }
        }
    }

    /// Accumulates parameter gradients into `grads` (same variant as `self`)
    /// and returns one gradient per input message, in input order.
    pub fn backward(
        &self,
        cache: &AggCache,
        grad_out: &[f64],
        grads: &mut Aggregator,
    ) -> Vec<Vec<f64>> {
        match (self, cache, grads) {
            (Aggregator::Mean, AggCache::Mean { count, dim }, Aggregator::Mean) => {
                let n = *count as f64;
                let g: Vec<f64> = grad_out.iter().map(|x| x / n).collect();
                debug_assert_eq!(g.len(), *dim);
                vec![g; *count]
            }
            (
                Aggregator::MaxPool { pool },
                AggCache::MaxPool {
                    inputs,
                    pre,
                    argmax,
                },
                Aggregator::MaxPool { pool: grad_pool },
            ) => {
                let width = pool.output_dim();
                let mut d_pre = vec![vec![0.0; width]; inputs.len()];
                for d in 0..width {
                    let k = argmax[d];
                    if pre[k][d] > 0.0 {
                        d_pre[k][d] += grad_out[d];
                    }
                }
                inputs
                    .iter()
                    .zip(&d_pre)
                    .map(|(x, dp)| {
                        if dp.iter().all(|v| *v == 0.0) {
                            vec![0.0; x.len()]
                        } else {
                            pool.backward(x, dp, grad_pool)
                        }
                    })
                    .collect()
            }
            (
                Aggregator::Lstm { lstm },
                AggCache::Lstm { order, cache },
                Aggregator::Lstm { lstm: grad_lstm },
            ) => {
                let dxs = lstm.backward(cache, grad_out, grad_lstm);
                let mut out = vec![Vec::new(); order.len()];
                for (dx, &i) in dxs.into_iter().zip(order) {
                    out[i] = dx;
                }
                out
            }
            _ => panic!("aggregator, cache and gradient buffers must be the same variant"),
        }
    }
}

/// Convenience wrapper returning only the aggregated vector.
pub fn aggregate<R: Rng + ?Sized>(
    aggregator: &Aggregator,
    messages: &[&[f64]],
    order_rng: Option<&mut R>,
) -> Result<Vec<f64>> {
    aggregator.forward(messages, order_rng).map(|(out, _)| out)
}

fn check_messages(messages: &[&[f64]]) -> Result<usize> {
    let first = messages
        .first()
        .ok_or_else(|| Error::Precondition("cannot aggregate an empty message list".into()))?;
    let dim = first.len();
    if let Some(bad) = messages.iter().find(|m| m.len() != dim) {
        return Err(Error::Shape(format!(
            "messages must share one dimension: {dim} vs {}",
            bad.len()
        )));
    }
    Ok(dim)
}

impl ParamSet for Aggregator {
    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            Aggregator::Mean => Vec::new(),
            Aggregator::MaxPool { pool } => pool.tensors(),
            Aggregator::Lstm { lstm } => lstm.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Aggregator::Mean => Vec::new(),
            Aggregator::MaxPool { pool } => pool.tensors_mut(),
            Aggregator::Lstm { lstm } => lstm.tensors_mut(),
        }
    }
}
