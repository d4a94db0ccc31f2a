//! Immutable undirected graph in compressed sparse row layout, plus the
//! neighbourhood queries used by the message-passing layers.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Dense zero-based node index.
pub type NodeId = usize;

/// Undirected simple graph. Neighbour lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Direction is discarded,
    /// duplicates collapse to one edge, and self-loops are dropped.
    pub fn from_edges(num_nodes: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            if u != v {
                degree[u] += 1;
                degree[v] += 1;
            }
        }

        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..num_nodes].to_vec();
        let mut targets = vec![0; *offsets.last().unwrap()];
        for &(u, v) in edges {
            if u != v {
                targets[fill[u]] = v;
                fill[u] += 1;
                targets[fill[v]] = u;
                fill[v] += 1;
            }
        }

        // Sort and dedup each row, then compact.
        let mut compact_offsets = Vec::with_capacity(num_nodes + 1);
        compact_offsets.push(0);
        let mut write = 0;
        for v in 0..num_nodes {
            let row = &mut targets[offsets[v]..offsets[v + 1]];
            row.sort_unstable();
            let mut last = None;
            for i in offsets[v]..offsets[v + 1] {
                let t = targets[i];
                if last != Some(t) {
                    targets[write] = t;
                    write += 1;
                    last = Some(t);
                }
            }
            compact_offsets.push(write);
        }
        targets.truncate(write);
        Ok(Graph {
            offsets: compact_offsets,
            targets,
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Graph {
            offsets: vec![0; num_nodes + 1],
            targets: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes())
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Canonical edge list: each undirected edge once as `(u, v)` with `u < v`,
    /// sorted lexicographically.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Copy of this graph with the given edges removed. Nodes are retained.
    pub fn without_edges(&self, removed: &[(NodeId, NodeId)]) -> Graph {
        let mut drop: Vec<(NodeId, NodeId)> = removed
            .iter()
            .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        drop.sort_unstable();
        let kept: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|e| drop.binary_search(e).is_err())
            .collect();
        Graph::from_edges(self.num_nodes(), &kept).expect("edges of an existing graph are in range")
    }

    /// Connected components of the subgraph induced by `subset`, where
    /// `subset` must be drawn from the neighbours of `v`.
    ///
    /// Only edges with both endpoints inside `subset` join components.
    /// Components are ordered by smallest member and members are ascending.
    pub fn neighborhood_components(
        &self,
        v: NodeId,
        subset: &[NodeId],
    ) -> Result<NeighborComponents> {
        if v >= self.num_nodes() {
            return Err(Error::Input(format!(
                "node {v} outside 0..{}",
                self.num_nodes()
            )));
        }
        let mut members = subset.to_vec();
        members.sort_unstable();
        members.dedup();
        let neighbors = self.neighbors(v);
        if let Some(&bad) = members.iter().find(|u| neighbors.binary_search(u).is_err()) {
            return Err(Error::Precondition(format!(
                "node {bad} is not a neighbour of {v}"
            )));
        }
        Ok(self.components_of_sorted(&members))
    }

    /// Component labelling for an already sorted, deduplicated node set.
    pub(crate) fn components_of_sorted(&self, members: &[NodeId]) -> NeighborComponents {
        let n = members.len();
        let mut dsu = DisjointSet::new(n);
        let pairwise_cost = n * n;
        let scan_cost: usize = members.iter().map(|&u| self.degree(u)).sum();
        if pairwise_cost <= scan_cost {
            for i in 0..n {
                for j in (i + 1)..n {
                    if self.has_edge(members[i], members[j]) {
                        dsu.union(i, j);
                    }
                }
            }
        } else {
            for (i, &u) in members.iter().enumerate() {
                for &w in self.neighbors(u) {
                    if w > u {
                        if let Ok(j) = members.binary_search(&w) {
                            dsu.union(i, j);
                        }
                    }
                }
            }
        }

        // Roots are visited in ascending member order, so components come out
        // sorted by smallest member with ascending members.
        let mut slot = vec![usize::MAX; n];
        let mut components: Vec<Vec<NodeId>> = Vec::new();
        for i in 0..n {
            let root = dsu.find(i);
            if slot[root] == usize::MAX {
                slot[root] = components.len();
                components.push(Vec::new());
            }
            components[slot[root]].push(members[i]);
        }
        NeighborComponents { components }
    }

    /// Uniform sample of at most `fanout` neighbours of `v`, returned sorted.
    /// When the degree does not exceed the fanout the full neighbourhood is
    /// returned and the random source is left untouched.
    pub fn sample_neighbors<R: Rng + ?Sized>(
        &self,
        v: NodeId,
        fanout: usize,
        rng: &mut R,
    ) -> Vec<NodeId> {
        let neighbors = self.neighbors(v);
        if neighbors.len() <= fanout {
            return neighbors.to_vec();
        }
        let mut picked: Vec<NodeId> = index::sample(rng, neighbors.len(), fanout)
            .into_iter()
            .map(|i| neighbors[i])
            .collect();
        picked.sort_unstable();
        picked
    }
}

/// Partition of a neighbour subset into connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborComponents {
    components: Vec<Vec<NodeId>>,
}

impl NeighborComponents {
    pub fn components(&self) -> &[Vec<NodeId>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn into_inner(self) -> Vec<Vec<NodeId>> {
        self.components
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
