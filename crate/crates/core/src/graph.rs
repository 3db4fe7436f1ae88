//! Directed weighted simple graphs and the degree/density metrics used on
//! the knowledge network.
//!
//! The directed graph is canonical. [`DirectedWeightedGraph::symmetrize`]
//! produces an undirected view in which every connected pair carries both
//! arcs with the summed weight; it is a lossy view and cannot be inverted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Employee roster number. Always `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(id: u32) -> Result<Self, GraphError> {
        if id == 0 {
            Err(GraphError::InvalidNodeId(id))
        } else {
            Ok(NodeId(id))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for NodeId {
    type Error = GraphError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for u32 {
    fn from(id: NodeId) -> u32 {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node id must be >= 1, got {0}")]
    InvalidNodeId(u32),
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),
    #[error("edge {from} -> {to} already exists")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge {from} -> {to} has invalid weight {weight}; weights must be finite and > 0")]
    InvalidWeight {
        from: NodeId,
        to: NodeId,
        weight: f64,
    },
    #[error("density needs at least 2 nodes, graph has {0}")]
    TooFewNodes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
}

impl WeightedEdge {
    pub fn new(source: NodeId, target: NodeId, weight: f64) -> Self {
        WeightedEdge {
            source,
            target,
            weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Degree {
    pub in_degree: usize,
    pub out_degree: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct WeightedDegree {
    pub in_weight: f64,
    pub out_weight: f64,
    pub total: f64,
}

type Neighbors = BTreeMap<NodeId, f64>;

/// A simple directed graph with positive real edge weights.
///
/// Adjacency is kept in both directions so degree queries do not scan the
/// edge set. All maps are ordered, so iteration is by `NodeId` and then by
/// target, which makes every export and report deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectedWeightedGraph {
    outgoing: BTreeMap<NodeId, Neighbors>,
    incoming: BTreeMap<NodeId, Neighbors>,
    edge_count: usize,
    undirected: bool,
}

impl DirectedWeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `id` to the node set. Re-adding an existing node is a no-op.
    pub fn add_node(&mut self, id: NodeId) {
        self.outgoing.entry(id).or_default();
        self.incoming.entry(id).or_default();
    }

    pub fn add_edge(&mut self, edge: WeightedEdge) -> Result<(), GraphError> {
        let WeightedEdge {
            source,
            target,
            weight,
        } = edge;
        if source == target {
            return Err(GraphError::SelfLoop(source));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(GraphError::InvalidWeight {
                from: source,
                to: target,
                weight,
            });
        }
        if !self.contains(target) {
            return Err(GraphError::UnknownNode(target));
        }
        let out = self
            .outgoing
            .get_mut(&source)
            .ok_or(GraphError::UnknownNode(source))?;
        if out.contains_key(&target) {
            return Err(GraphError::DuplicateEdge {
                from: source,
                to: target,
            });
        }
        out.insert(target, weight);
        self.incoming
            .get_mut(&target)
            .expect("incoming and outgoing share a key set")
            .insert(source, weight);
        self.edge_count += 1;
        Ok(())
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.outgoing.contains_key(&id)
    }

    pub fn node_count(&self) -> usize {
        self.outgoing.len()
    }

    /// Number of stored arcs. An undirected view stores two arcs per pair.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// True for graphs produced by [`symmetrize`](Self::symmetrize).
    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.outgoing.keys().copied()
    }

    /// All arcs ordered by source, then target.
    pub fn edges(&self) -> impl Iterator<Item = WeightedEdge> + '_ {
        self.outgoing.iter().flat_map(|(&source, targets)| {
            targets
                .iter()
                .map(move |(&target, &weight)| WeightedEdge::new(source, target, weight))
        })
    }

    pub fn edge_weight(&self, source: NodeId, target: NodeId) -> Option<f64> {
        self.outgoing.get(&source)?.get(&target).copied()
    }

    pub fn out_neighbors(&self, id: NodeId) -> Option<&BTreeMap<NodeId, f64>> {
        self.outgoing.get(&id)
    }

    pub fn degree(&self, id: NodeId) -> Result<Degree, GraphError> {
        let (out, inc) = self.adjacency(id)?;
        Ok(Degree {
            in_degree: inc.len(),
            out_degree: out.len(),
            total: inc.len() + out.len(),
        })
    }

    pub fn weighted_degree(&self, id: NodeId) -> Result<WeightedDegree, GraphError> {
        let (out, inc) = self.adjacency(id)?;
        let in_weight: f64 = inc.values().sum();
        let out_weight: f64 = out.values().sum();
        Ok(WeightedDegree {
            in_weight,
            out_weight,
            total: in_weight + out_weight,
        })
    }

    /// Directed density `m / (n (n - 1))`. For an undirected view this is
    /// `pairs / (n (n - 1) / 2)`.
    pub fn density(&self) -> Result<f64, GraphError> {
        let n = self.node_count();
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let n = n as f64;
        if self.undirected {
            let pairs = (self.edge_count / 2) as f64;
            Ok(pairs / (n * (n - 1.0) / 2.0))
        } else {
            Ok(self.edge_count as f64 / (n * (n - 1.0)))
        }
    }

    /// Sum of edge weights. For an undirected view each pair counts once,
    /// so symmetrizing preserves this value.
    pub fn total_weight(&self) -> f64 {
        let undirected = self.undirected;
        self.edges()
            .filter(|e| !undirected || e.source < e.target)
            .map(|e| e.weight)
            .sum()
    }

    /// Undirected view: every pair `{a, b}` joined in either direction gets
    /// both arcs, each weighted with `w(a->b) + w(b->a)`. Idempotent.
    pub fn symmetrize(&self) -> DirectedWeightedGraph {
        if self.undirected {
            return self.clone();
        }
        let mut pair_weights: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        for e in self.edges() {
            let key = (e.source.min(e.target), e.source.max(e.target));
            *pair_weights.entry(key).or_insert(0.0) += e.weight;
        }
        let mut view = DirectedWeightedGraph::new();
        for id in self.nodes() {
            view.add_node(id);
        }
        for ((a, b), w) in pair_weights {
            view.add_edge(WeightedEdge::new(a, b, w))
                .and_then(|()| view.add_edge(WeightedEdge::new(b, a, w)))
                .expect("pairs are distinct, non-loop and between known nodes");
        }
        view.undirected = true;
        view
    }

    /// Marks a graph as an undirected view. Used by importers that rebuild
    /// both arcs of each pair themselves.
    pub(crate) fn set_undirected(&mut self, undirected: bool) {
        self.undirected = undirected;
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.nodes().collect()
    }

    fn adjacency(&self, id: NodeId) -> Result<(&Neighbors, &Neighbors), GraphError> {
        match (self.outgoing.get(&id), self.incoming.get(&id)) {
            (Some(out), Some(inc)) => Ok((out, inc)),
            _ => Err(GraphError::UnknownNode(id)),
        }
    }
}

#[cfg(test)]
pub(crate) fn id(n: u32) -> NodeId {
    NodeId::new(n).unwrap()
}
