use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::io::NodeLabel;
use crate::error::{Error, Result};
use crate::graph::{DisjointSet, Graph, NodeId};
use crate::numeric::Matrix;
use crate::seeds;

/// Planted-community citation graph with interdisciplinary "bridge" nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub num_communities: usize,
    pub community_size: usize,
    /// Edge probability between two nodes of the same community.
    pub p_in: f64,
    /// Edge probability between nodes of different communities.
    pub p_out: f64,
    /// Share of each community designated as bridge nodes.
    pub bridge_fraction: f64,
    /// Extra edges each bridge sends into its linked community.
    pub bridge_degree_boost: usize,
    pub feature_dim: usize,
    /// Norm of each community's feature centre.
    pub center_separation: f64,
    /// Per-coordinate standard deviation of feature noise.
    pub feature_noise: f64,
    /// Derived from the run's master seed, never read from configuration.
    #[serde(skip)]
    pub seed: u64,
    /// Drop everything outside the largest connected component.
    pub keep_largest_component: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_communities: 8,
            community_size: 150,
            p_in: 0.05,
            p_out: 0.002,
            bridge_fraction: 0.05,
            bridge_degree_boost: 8,
            feature_dim: 64,
            center_separation: 4.0,
            feature_noise: 1.0,
            seed: 0,
            keep_largest_component: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_communities == 0 || self.community_size == 0 || self.feature_dim == 0 {
            return Err(Error::Config(
                "num_communities, community_size and feature_dim must be at least 1".into(),
            ));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(Error::Config(format!(
                "need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            )));
        }
        if !(0.0..=1.0).contains(&self.bridge_fraction) {
            return Err(Error::Config(format!(
                "bridge_fraction must lie in [0, 1], got {}",
                self.bridge_fraction
            )));
        }
        if !(self.center_separation >= 0.0 && self.feature_noise >= 0.0) {
            return Err(Error::Config(
                "center_separation and feature_noise must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub graph: Graph,
    pub features: Matrix,
    pub labels: Vec<NodeLabel>,
    /// For bridge nodes, the community their extra edges point into.
    pub linked_community: Vec<Option<usize>>,
}

/// Stochastic block model with planted bridges and community-centred
/// Gaussian features. Node `v` starts in community `v / community_size`.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let k = cfg.num_communities;
    let size = cfg.community_size;
    let n = k * size;
    let community = |v: NodeId| v / size;

    let mut sbm_rng = seeds::stream(cfg.seed, "synthetic/sbm");
    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut edge_list = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if community(u) == community(v) {
                cfg.p_in
            } else {
                cfg.p_out
            };
            if sbm_rng.random::<f64>() < p {
                edges.insert((u, v));
                edge_list.push((u, v));
            }
        }
    }

    let mut bridge_rng = seeds::stream(cfg.seed, "synthetic/bridges");
    let per_community = ((cfg.bridge_fraction * size as f64).round() as usize).min(size);
    let mut linked_community = vec![None; n];
    if k >= 2 {
        for c in 0..k {
            let chosen = index::sample(&mut bridge_rng, size, per_community).into_vec();
            let mut chosen: Vec<NodeId> = chosen.into_iter().map(|i| c * size + i).collect();
            chosen.sort_unstable();
            for b in chosen {
                let mut target = bridge_rng.random_range(0..k - 1);
                if target >= c {
                    target += 1;
                }
                linked_community[b] = Some(target);
                let candidates: Vec<NodeId> = (target * size..(target + 1) * size)
                    .filter(|&w| !edges.contains(&(b.min(w), b.max(w))))
                    .collect();
                let take = cfg.bridge_degree_boost.min(candidates.len());
                let mut picks = index::sample(&mut bridge_rng, candidates.len(), take).into_vec();
                picks.sort_unstable();
                for i in picks {
                    let w = candidates[i];
                    let e = (b.min(w), b.max(w));
                    edges.insert(e);
                    edge_list.push(e);
                }
            }
        }
    }

    let mut feature_rng = seeds::stream(cfg.seed, "synthetic/features");
    let d = cfg.feature_dim;
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let raw: Vec<f64> = (0..d)
                .map(|_| StandardNormal.sample(&mut feature_rng))
                .collect();
            let norm = raw
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            raw.iter()
                .map(|x| x / norm * cfg.center_separation)
                .collect()
        })
        .collect();
    let mut features = Matrix::zeros(n, d);
    for v in 0..n {
        let home = &centers[community(v)];
        let row = features.row_mut(v);
        for j in 0..d {
            let base = match linked_community[v] {
                Some(t) => 0.5 * (home[j] + centers[t][j]),
                None => home[j],
            };
            let noise: f64 = StandardNormal.sample(&mut feature_rng);
            row[j] = base + cfg.feature_noise * noise;
        }
    }

    let labels: Vec<NodeLabel> = (0..n)
        .map(|v| NodeLabel {
            community: community(v),
            is_bridge: linked_community[v].is_some(),
        })
        .collect();
    let graph = Graph::from_edges(n, &edge_list)?;
    let data = SyntheticData {
        graph,
        features,
        labels,
        linked_community,
    };
    Ok(if cfg.keep_largest_component {
        largest_component(data)
    } else {
        data
    })
}

fn largest_component(data: SyntheticData) -> SyntheticData {
    let n = data.graph.num_nodes();
    let mut dsu = DisjointSet::new(n);
    for (u, v) in data.graph.edges() {
        dsu.union(u, v);
    }
    let mut counts = vec![0usize; n];
    for v in 0..n {
        counts[dsu.find(v)] += 1;
    }
    // Ties go to the component containing the smallest node id.
    let mut best = None;
    for v in 0..n {
        let r = dsu.find(v);
        if best.is_none_or(|b: usize| counts[r] > counts[b]) {
            best = Some(r);
        }
    }
    let Some(best) = best else { return data };
    let keep: Vec<NodeId> = (0..n).filter(|&v| dsu.find(v) == best).collect();
    let mut relabel = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        relabel[old] = new;
    }
    let edges: Vec<_> = data
        .graph
        .edges()
        .into_iter()
        .filter(|&(u, _)| relabel[u] != usize::MAX)
        .map(|(u, v)| (relabel[u], relabel[v]))
        .collect();
    SyntheticData {
        graph: Graph::from_edges(keep.len(), &edges).expect("relabelled ids are in range"),
        features: data.features.select_rows(&keep),
        labels: keep.iter().map(|&v| data.labels[v]).collect(),
        linked_community: keep.iter().map(|&v| data.linked_community[v]).collect(),
    }
}
