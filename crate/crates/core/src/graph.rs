//! Immutable weighted undirected graph.
//!
//! Nodes are dense indices `0..node_count`. Every edge `{u, v}` is stored once
//! in [`WeightedGraph::edges`] with `u < v` and appears in both adjacency
//! lists, sorted by neighbor id. Weights are strictly positive.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(
    Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// Index into [`WeightedGraph::edges`].
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub weight: f64,
    pub edge: EdgeId,
}

#[derive(Clone, Debug)]
pub struct WeightedGraph {
    node_weights: Vec<f64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl WeightedGraph {
    /// Builds a graph with every node weight set to 1.
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::with_node_weights(vec![1.0; node_count], edges)
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(node_count, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn with_node_weights<I>(node_weights: Vec<f64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = node_weights.len();
        if let Some(i) = node_weights
            .iter()
            .position(|&w| !(w > 0.0 && w.is_finite()))
        {
            return Err(Error::NonPositiveNodeWeight(i));
        }

        let mut list = Vec::new();
        for (u, v, weight) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange {
                        node,
                        node_count: n,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::NonPositiveWeight { u, v, weight });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            list.push(Edge {
                u: NodeId(a),
                v: NodeId(b),
                weight,
            });
        }
        list.sort_by_key(|e| (e.u, e.v));
        if let Some(w) = list
            .windows(2)
            .find(|w| w[0].u == w[1].u && w[0].v == w[1].v)
        {
            return Err(Error::DuplicateEdge {
                u: w[0].u.0,
                v: w[0].v.0,
            });
        }

        let mut adjacency = vec![Vec::new(); n];
        for (id, e) in list.iter().enumerate() {
            adjacency[e.u.0].push(Neighbor {
                node: e.v,
                weight: e.weight,
                edge: id,
            });
            adjacency[e.v.0].push(Neighbor {
                node: e.u,
                weight: e.weight,
                edge: id,
            });
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|nb| nb.node);
        }

        let graph = WeightedGraph {
            node_weights,
            edges: list,
            adjacency,
        };
        graph.check_symmetry()?;
        Ok(graph)
    }

    /// Exhaustive check that every adjacency entry is mirrored with the same weight.
    fn check_symmetry(&self) -> Result<()> {
        for (i, adj) in self.adjacency.iter().enumerate() {
            for nb in adj {
                let back = self.adjacency[nb.node.0]
                    .binary_search_by_key(&NodeId(i), |m| m.node)
                    .map(|pos| self.adjacency[nb.node.0][pos]);
                match back {
                    Ok(m) if m.weight == nb.weight && m.edge == nb.edge => {}
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "asymmetric adjacency between {i} and {}",
                            nb.node
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.node_count()).map(NodeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    pub fn check_node(&self, i: NodeId) -> Result<()> {
        if i.0 < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: i.0,
                node_count: self.node_count(),
            })
        }
    }

    /// Neighbors of `i` in ascending id order.
    pub fn neighbors(&self, i: NodeId) -> Result<&[Neighbor]> {
        self.check_node(i)?;
        Ok(&self.adjacency[i.0])
    }

    pub fn degree(&self, i: NodeId) -> Result<usize> {
        self.neighbors(i).map(<[_]>::len)
    }

    pub fn strength_of(&self, i: NodeId) -> Result<f64> {
        self.neighbors(i)
            .map(|adj| adj.iter().map(|nb| nb.weight).sum())
    }

    pub fn node_weight(&self, i: NodeId) -> Result<f64> {
        self.check_node(i)?;
        Ok(self.node_weights[i.0])
    }

    /// Unchecked adjacency access for hot loops.
    #[inline]
    pub(crate) fn adj(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let adj = self.adjacency.get(u.0)?;
        adj.binary_search_by_key(&v, |nb| nb.node)
            .ok()
            .map(|pos| adj[pos].edge)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.find_edge(u, v).is_some()
    }

    /// Subgraph induced by `nodes`, re-indexed densely in ascending id order.
    ///
    /// Returns the new graph and, for each new id, the original node id.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Result<(WeightedGraph, Vec<NodeId>)> {
        let mut keep: Vec<NodeId> = nodes.to_vec();
        for &i in &keep {
            self.check_node(i)?;
        }
        keep.sort_unstable();
        keep.dedup();

        let mut new_id = vec![usize::MAX; self.node_count()];
        for (k, i) in keep.iter().enumerate() {
            new_id[i.0] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| new_id[e.u.0] != usize::MAX && new_id[e.v.0] != usize::MAX)
            .map(|e| (new_id[e.u.0], new_id[e.v.0], e.weight));
        let weights = keep.iter().map(|i| self.node_weights[i.0]).collect();
        let sub = WeightedGraph::with_node_weights(weights, edges)?;
        Ok((sub, keep))
    }

    /// Connected component label per node; labels are assigned in order of
    /// the smallest node id in each component.
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for nb in &self.adjacency[x] {
                    if label[nb.node.0] == usize::MAX {
                        label[nb.node.0] = next;
                        queue.push_back(nb.node.0);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.component_labels()
            .into_iter()
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Nodes of the largest connected component (ties go to the component
    /// containing the smaller node id), ascending.
    pub fn largest_component(&self) -> Vec<NodeId> {
        let labels = self.component_labels();
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let Some(best) = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))) else {
            return Vec::new();
        };
        labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == best)
            .map(|(i, _)| NodeId(i))
            .collect()
    }

    /// SHA-256 over node weights and the canonical edge list, hex encoded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.node_count() as u64).to_le_bytes());
        for w in &self.node_weights {
            h.update(w.to_bits().to_le_bytes());
        }
        for e in &self.edges {
            h.update((e.u.0 as u64).to_le_bytes());
            h.update((e.v.0 as u64).to_le_bytes());
            h.update(e.weight.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.node_weights.iter().all(|&w| w == 1.0) && self.edges.iter().all(|e| e.weight == 1.0)
    }
}
