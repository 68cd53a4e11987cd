//! Per-node network statistics on the full graph: betweenness, closeness,
//! strength and the weighted (Barrat) clustering coefficient.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Every edge has length one.
    #[default]
    Hop,
    /// Edge weight is the edge length.
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum StatKind {
    Betweenness,
    Closeness,
    Strength,
    WeightedClustering,
}

impl StatKind {
    pub const ALL: [StatKind; 4] = [
        StatKind::Betweenness,
        StatKind::Closeness,
        StatKind::Strength,
        StatKind::WeightedClustering,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatKind::Betweenness => "betweenness",
            StatKind::Closeness => "closeness",
            StatKind::Strength => "strength",
            StatKind::WeightedClustering => "weighted_clustering",
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatVector {
    pub kind: StatKind,
    pub path_mode: PathMode,
    pub values: Vec<f64>,
    /// Nodes where the statistic is undefined and reported as 0
    /// (closeness of isolated nodes).
    pub undefined: Vec<NodeId>,
}

impl StatVector {
    pub fn get(&self, i: NodeId) -> f64 {
        self.values[i.0]
    }
}

pub fn compute_statistic(graph: &WeightedGraph, kind: StatKind, path_mode: PathMode) -> StatVector {
    match kind {
        StatKind::Betweenness => betweenness(graph, path_mode),
        StatKind::Closeness => closeness(graph, path_mode),
        StatKind::Strength => strength_vector(graph),
        StatKind::WeightedClustering => weighted_clustering(graph),
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths with path counts.
struct ShortestPaths {
    /// Settled nodes in non-decreasing distance order.
    order: Vec<usize>,
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

fn shortest_paths(graph: &WeightedGraph, source: usize, mode: PathMode) -> ShortestPaths {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut order = Vec::new();
    dist[source] = 0.0;
    sigma[source] = 1.0;

    match mode {
        PathMode::Hop => {
            let mut queue = VecDeque::from([source]);
            while let Some(x) = queue.pop_front() {
                order.push(x);
                for nb in graph.adj(x) {
                    let y = nb.node.0;
                    if dist[y].is_infinite() {
                        dist[y] = dist[x] + 1.0;
                        queue.push_back(y);
                    }
                    if dist[y] == dist[x] + 1.0 {
                        sigma[y] += sigma[x];
                        preds[y].push(x);
                    }
                }
            }
        }
        PathMode::Weighted => {
            let mut settled = vec![false; n];
            let mut heap = BinaryHeap::from([HeapEntry {
                dist: 0.0,
                node: source,
            }]);
            while let Some(HeapEntry { dist: d, node: x }) = heap.pop() {
                if settled[x] || d > dist[x] {
                    continue;
                }
                settled[x] = true;
                order.push(x);
                for nb in graph.adj(x) {
                    let y = nb.node.0;
                    let alt = d + nb.weight;
                    if alt < dist[y] {
                        dist[y] = alt;
                        sigma[y] = sigma[x];
                        preds[y].clear();
                        preds[y].push(x);
                        heap.push(HeapEntry { dist: alt, node: y });
                    } else if alt == dist[y] && !settled[y] {
                        sigma[y] += sigma[x];
                        preds[y].push(x);
                    }
                }
            }
        }
    }
    ShortestPaths {
        order,
        dist,
        sigma,
        preds,
    }
}

/// Sources per parallel work unit. Fixed so partial sums combine in the same
/// order whatever the thread count.
const SOURCE_CHUNK: usize = 16;

/// Unnormalized betweenness over unordered pairs, endpoints excluded.
pub fn betweenness(graph: &WeightedGraph, path_mode: PathMode) -> StatVector {
    let n = graph.node_count();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut delta = vec![0.0; n];
            for &s in chunk {
                let sp = shortest_paths(graph, s, path_mode);
                delta.iter_mut().for_each(|d| *d = 0.0);
                for &w in sp.order.iter().rev() {
                    for &v in &sp.preds[w] {
                        delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
                    }
                    if w != s {
                        acc[w] += delta[w];
                    }
                }
            }
            acc
        })
        .collect();

    let mut values = vec![0.0; n];
    for part in &partials {
        for (v, p) in values.iter_mut().zip(part) {
            *v += p;
        }
    }
    // every unordered pair was counted from both ends
    values.iter_mut().for_each(|v| *v /= 2.0);
    StatVector {
        kind: StatKind::Betweenness,
        path_mode,
        values,
        undefined: Vec::new(),
    }
}

/// Reciprocal of the summed distance to every reachable node.
pub fn closeness(graph: &WeightedGraph, path_mode: PathMode) -> StatVector {
    let values: Vec<Option<f64>> = (0..graph.node_count())
        .into_par_iter()
        .map(|i| {
            let sp = shortest_paths(graph, i, path_mode);
            let total: f64 = sp.order.iter().map(|&j| sp.dist[j]).sum();
            (sp.order.len() > 1).then(|| 1.0 / total)
        })
        .collect();
    let undefined: Vec<NodeId> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| NodeId(i))
        .collect();
    if !undefined.is_empty() {
        warn!(
            "closeness undefined for {} isolated node(s); reported as 0",
            undefined.len()
        );
    }
    StatVector {
        kind: StatKind::Closeness,
        path_mode,
        values: values.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
        undefined,
    }
}

pub fn strength_vector(graph: &WeightedGraph) -> StatVector {
    StatVector {
        kind: StatKind::Strength,
        path_mode: PathMode::Hop,
        values: (0..graph.node_count())
            .map(|i| graph.adj(i).iter().map(|nb| nb.weight).sum())
            .collect(),
        undefined: Vec::new(),
    }
}

/// Barrat coefficient: sum over ordered neighbor pairs `(j, h)` closing a
/// triangle of `w_ij + w_ih`, divided by `2 s(i) (d(i) - 1)`. Zero when
/// `d(i) <= 1`.
pub fn weighted_clustering(graph: &WeightedGraph) -> StatVector {
    let values = (0..graph.node_count())
        .map(|i| {
            let adj = graph.adj(i);
            let d = adj.len();
            if d <= 1 {
                return 0.0;
            }
            let mut numerator = 0.0;
            for (a, j) in adj.iter().enumerate() {
                for (b, h) in adj.iter().enumerate() {
                    if a != b && graph.has_edge(j.node, h.node) {
                        numerator += j.weight + h.weight;
                    }
                }
            }
            let strength: f64 = adj.iter().map(|nb| nb.weight).sum();
            numerator / (2.0 * strength * (d - 1) as f64)
        })
        .collect();
    StatVector {
        kind: StatKind::WeightedClustering,
        path_mode: PathMode::Hop,
        values,
        undefined: Vec::new(),
    }
}

/// Arithmetic mean of `stat` over `nodes`, or over every node when `None`.
///
/// The node set is deduplicated and summed in ascending id order, so a set
/// covering every node yields exactly the full-graph mean.
pub fn mean_statistic(stat: &StatVector, nodes: Option<&[NodeId]>) -> Result<f64> {
    match nodes {
        None => {
            if stat.values.is_empty() {
                return Err(Error::EmptyNodeSet);
            }
            Ok(stat.values.iter().sum::<f64>() / stat.values.len() as f64)
        }
        Some(nodes) => {
            let mut ids = nodes.to_vec();
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() {
                return Err(Error::EmptyNodeSet);
            }
            if let Some(bad) = ids.iter().find(|i| i.0 >= stat.values.len()) {
                return Err(Error::NodeOutOfRange {
                    node: bad.0,
                    node_count: stat.values.len(),
                });
            }
            Ok(ids.iter().map(|i| stat.values[i.0]).sum::<f64>() / ids.len() as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::unweighted(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn star(k: usize) -> WeightedGraph {
        WeightedGraph::unweighted(k + 1, (1..=k).map(|l| (0, l))).unwrap()
    }

    fn complete(n: usize) -> WeightedGraph {
        WeightedGraph::unweighted(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn betweenness_small_graphs() {
        assert_eq!(
            betweenness(&path3(), PathMode::Hop).values,
            vec![0.0, 1.0, 0.0]
        );
        assert_eq!(betweenness(&star(4), PathMode::Hop).values[0], 6.0);
        assert!(betweenness(&complete(5), PathMode::Hop)
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn betweenness_splits_over_equal_paths() {
        // square 0-1-2-3-0: pair (0, 2) has two shortest paths
        let g = WeightedGraph::unweighted(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(betweenness(&g, PathMode::Hop).values, vec![0.5; 4]);
    }

    #[test]
    fn weighted_paths_change_routes() {
        // triangle where the direct 0-2 edge is longer than going through 1
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        assert_eq!(betweenness(&g, PathMode::Hop).values[1], 0.0);
        assert_eq!(betweenness(&g, PathMode::Weighted).values[1], 1.0);
        assert_eq!(closeness(&g, PathMode::Weighted).values[0], 1.0 / 3.0);
    }

    #[test]
    fn closeness_values() {
        let c = closeness(&path3(), PathMode::Hop);
        assert_eq!(c.values[1], 0.5);
        assert_eq!(c.values[0], 1.0 / 3.0);
        assert_eq!(closeness(&star(7), PathMode::Hop).values[0], 1.0 / 7.0);
    }

    #[test]
    fn closeness_per_component_and_isolated() {
        let g = WeightedGraph::unweighted(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let g2 = WeightedGraph::unweighted(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let c = closeness(&g, PathMode::Hop);
        assert_eq!(c.values[3], 1.0);
        assert_eq!(c.values[1], 0.5);
        assert!(c.undefined.is_empty());
        let c2 = closeness(&g2, PathMode::Hop);
        assert_eq!(c2.values[5], 0.0);
        assert_eq!(c2.undefined, vec![NodeId(5)]);
    }

    #[test]
    fn strength_values() {
        assert_eq!(strength_vector(&star(4)).values[0], 4.0);
        let g = WeightedGraph::new(4, [(0, 1, 2.0), (0, 2, 0.5)]).unwrap();
        assert_eq!(strength_vector(&g).values, vec![2.5, 2.0, 0.5, 0.0]);
    }

    #[test]
    fn clustering_values() {
        let tri = complete(3);
        assert_eq!(weighted_clustering(&tri).values, vec![1.0; 3]);
        let s = weighted_clustering(&star(4));
        assert_eq!(s.values[0], 0.0);
        assert_eq!(s.values[1], 0.0);
        // triangle 0-1-2 plus pendant 0-3, weights w01 = 2, w02 = 1, w03 = 1, w12 = 1
        let g =
            WeightedGraph::new(4, [(0, 1, 2.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0)]).unwrap();
        // numerator (2+1)+(1+2) = 6, denominator 2*4*2 = 16
        assert_eq!(weighted_clustering(&g).values[0], 6.0 / 16.0);
    }

    #[test]
    fn means() {
        let bc = betweenness(&path3(), PathMode::Hop);
        assert_eq!(
            mean_statistic(&bc, Some(&[NodeId(0), NodeId(1)])).unwrap(),
            0.5
        );
        assert_eq!(mean_statistic(&bc, Some(&[NodeId(1)])).unwrap(), 1.0);
        assert_eq!(mean_statistic(&bc, None).unwrap(), 1.0 / 3.0);
        assert_eq!(
            mean_statistic(&bc, Some(&[NodeId(1), NodeId(0), NodeId(1)])).unwrap(),
            0.5
        );
        assert!(matches!(
            mean_statistic(&bc, Some(&[])),
            Err(Error::EmptyNodeSet)
        ));
        assert!(mean_statistic(&bc, Some(&[NodeId(3)])).is_err());
    }

    #[test]
    fn full_set_mean_matches_all() {
        let g = WeightedGraph::new(
            5,
            [
                (0, 1, 0.3),
                (1, 2, 0.7),
                (2, 3, 1.1),
                (3, 4, 0.1),
                (4, 0, 0.9),
            ],
        )
        .unwrap();
        let s = weighted_clustering(&g);
        let cl = closeness(&g, PathMode::Weighted);
        let all: Vec<_> = g.nodes().rev().collect();
        for stat in [s, cl] {
            assert_eq!(
                mean_statistic(&stat, Some(&all)).unwrap(),
                mean_statistic(&stat, None).unwrap()
            );
        }
    }
}
