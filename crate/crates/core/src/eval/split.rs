use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seeds;

pub type Edge = (NodeId, NodeId);

/// Positive and negative edges for train, validation and test. Every pair
/// is stored as `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub train_pos: Vec<Edge>,
    pub val_pos: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub train_neg: Vec<Edge>,
    pub val_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
    pub seed: u64,
}

impl EdgeSplit {
    /// Test positives followed by test negatives, with matching labels.
    pub fn test_edges(&self) -> (Vec<Edge>, Vec<bool>) {
        labelled(&self.test_pos, &self.test_neg)
    }

    pub fn train_edges(&self) -> (Vec<Edge>, Vec<bool>) {
        labelled(&self.train_pos, &self.train_neg)
    }

    pub fn val_edges(&self) -> (Vec<Edge>, Vec<bool>) {
        labelled(&self.val_pos, &self.val_neg)
    }
}

fn labelled(pos: &[Edge], neg: &[Edge]) -> (Vec<Edge>, Vec<bool>) {
    let edges = pos.iter().chain(neg).copied().collect();
    let labels = std::iter::repeat_n(true, pos.len())
        .chain(std::iter::repeat_n(false, neg.len()))
        .collect();
    (edges, labels)
}

/// Holds out `round(test_frac·|E|)` test and `round(val_frac·|E|)` validation
/// edges uniformly at random, and draws an equal number of distinct
/// non-edges for each part. Returns the split and the training graph, which
/// keeps every node but only the training edges.
pub fn split_edges(
    graph: &Graph,
    test_frac: f64,
    val_frac: f64,
    seed: u64,
) -> Result<(EdgeSplit, Graph)> {
    if !(test_frac > 0.0 && val_frac >= 0.0 && test_frac + val_frac < 1.0) {
        return Err(Error::Precondition(format!(
            "need 0 < test_frac + val_frac < 1, got test {test_frac}, val {val_frac}"
        )));
    }
    let mut edges = graph.edges();
    let m = edges.len();
    let n_test = (test_frac * m as f64).round() as usize;
    let n_val = (val_frac * m as f64).round() as usize;
    if n_test == 0 || n_test + n_val >= m {
        return Err(Error::Input(format!(
            "{m} edges cannot be split into {n_test} test, {n_val} validation and a non-empty training set"
        )));
    }
    let mut rng = seeds::stream(seed, "split/positives");
    edges.shuffle(&mut rng);
    let mut test_pos = edges[..n_test].to_vec();
    let mut val_pos = edges[n_test..n_test + n_val].to_vec();
    let mut train_pos = edges[n_test + n_val..].to_vec();

    let n = graph.num_nodes();
    let non_edges = n * n.saturating_sub(1) / 2 - m;
    if non_edges < m {
        return Err(Error::Input(format!(
            "graph has {non_edges} non-edges, fewer than the {m} negatives required"
        )));
    }
    let mut neg_rng = seeds::stream(seed, "split/negatives");
    let negatives = sample_non_edges(graph, m, non_edges, &mut neg_rng);
    let mut test_neg = negatives[..n_test].to_vec();
    let mut val_neg = negatives[n_test..n_test + n_val].to_vec();
    let mut train_neg = negatives[n_test + n_val..].to_vec();

    let mut held_out = test_pos.clone();
    held_out.extend_from_slice(&val_pos);
    let train_graph = graph.without_edges(&held_out);
    for list in [
        &mut test_pos,
        &mut val_pos,
        &mut train_pos,
        &mut test_neg,
        &mut val_neg,
        &mut train_neg,
    ] {
        list.sort_unstable();
    }
    Ok((
        EdgeSplit {
            train_pos,
            val_pos,
            test_pos,
            train_neg,
            val_neg,
            test_neg,
            seed,
        },
        train_graph,
    ))
}

/// `count` distinct uniformly drawn node pairs that are not edges.
fn sample_non_edges<R: Rng + ?Sized>(
    graph: &Graph,
    count: usize,
    available: usize,
    rng: &mut R,
) -> Vec<Edge> {
    let n = graph.num_nodes();
    if available <= 4 * count {
        let all: Vec<Edge> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !graph.has_edge(u, v))
            .collect();
        return index::sample(rng, all.len(), count)
            .into_iter()
            .map(|i| all[i])
            .collect();
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let e = (u.min(v), u.max(v));
        if !graph.has_edge(e.0, e.1) && seen.insert(e) {
            out.push(e);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn hundred_edges_split_twenty_five_seventyfive() {
        let g = ring(100);
        let (s, train) = split_edges(&g, 0.20, 0.05, 1).unwrap();
        assert_eq!(
            (s.test_pos.len(), s.val_pos.len(), s.train_pos.len()),
            (20, 5, 75)
        );
        assert_eq!(
            (s.test_neg.len(), s.val_neg.len(), s.train_neg.len()),
            (20, 5, 75)
        );
        assert_eq!(train.num_edges(), 75);
        assert_eq!(train.num_nodes(), 100);
        for &(u, v) in s.test_neg.iter().chain(&s.val_neg).chain(&s.train_neg) {
            assert!(!g.has_edge(u, v));
        }
        for &(u, v) in s.test_pos.iter().chain(&s.val_pos) {
            assert!(!train.has_edge(u, v));
        }
    }

    #[test]
    fn negatives_are_distinct_across_parts() {
        let (s, _) = split_edges(&ring(60), 0.2, 0.1, 3).unwrap();
        let mut all: Vec<_> = s
            .test_neg
            .iter()
            .chain(&s.val_neg)
            .chain(&s.train_neg)
            .collect();
        let total = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), total);
    }

    #[test]
    fn same_seed_same_split() {
        let g = ring(50);
        assert_eq!(
            split_edges(&g, 0.2, 0.05, 9).unwrap(),
            split_edges(&g, 0.2, 0.05, 9).unwrap()
        );
        assert_ne!(
            split_edges(&g, 0.2, 0.05, 9).unwrap().0,
            split_edges(&g, 0.2, 0.05, 10).unwrap().0
        );
    }

    #[test]
    fn dense_graphs_fall_back_to_enumeration() {
        // 8 nodes, 14 edges, 14 non-edges: every non-edge gets used.
        let mut edges = Vec::new();
        for u in 0..8 {
            for v in (u + 1)..8 {
                if (u + v) % 2 == 1 && edges.len() < 14 {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(8, &edges).unwrap();
        let (s, _) = split_edges(&g, 0.3, 0.1, 0).unwrap();
        assert_eq!(s.test_neg.len() + s.val_neg.len() + s.train_neg.len(), 14);
    }

    #[test]
    fn too_small_or_bad_fractions() {
        assert!(split_edges(&ring(3), 0.2, 0.05, 0).is_err());
        assert!(matches!(
            split_edges(&ring(50), 0.7, 0.3, 0),
            Err(Error::Precondition(_))
        ));
        assert!(split_edges(&ring(50), 0.0, 0.3, 0).is_err());
    }
}
