//! Forman curvature of edges and nodes.
//!
//! For an edge `{i, j}` with weight `w_ij` and endpoint weights `w(i)`, `w(j)`:
//!
//! ```text
//! F(i,j) = w_ij * ( w(i)/w_ij + w(j)/w_ij
//!                   - sum_{e ~ i, e != ij} w(i) / sqrt(w_ij * w_e)
//!                   - sum_{e ~ j, e != ij} w(j) / sqrt(w_ij * w_e) )
//! ```
//!
//! With all weights equal to one this is `4 - d(i) - d(j)`. The curvature of
//! a node is the sum over its incident edges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    Weighted,
    #[default]
    Combinatorial,
}

pub fn edge_forman(graph: &WeightedGraph, u: NodeId, v: NodeId) -> Result<f64> {
    graph.check_node(u)?;
    graph.check_node(v)?;
    let e = graph.find_edge(u, v).ok_or(Error::EdgeNotFound(u, v))?;
    Ok(weighted_edge(graph, e))
}

pub fn edge_forman_combinatorial(graph: &WeightedGraph, u: NodeId, v: NodeId) -> Result<f64> {
    graph.check_node(u)?;
    graph.check_node(v)?;
    let e = graph.find_edge(u, v).ok_or(Error::EdgeNotFound(u, v))?;
    Ok(combinatorial_edge(graph, e))
}

fn weighted_edge(graph: &WeightedGraph, e: EdgeId) -> f64 {
    let edge = graph.edges()[e];
    let w_e = edge.weight;
    let w_u = graph.node_weights()[edge.u.0];
    let w_v = graph.node_weights()[edge.v.0];

    let side = |node: NodeId, node_weight: f64| -> f64 {
        graph
            .adj(node.0)
            .iter()
            .filter(|nb| nb.edge != e)
            .map(|nb| node_weight / (w_e * nb.weight).sqrt())
            .sum::<f64>()
    };

    w_e * (w_u / w_e + w_v / w_e - side(edge.u, w_u) - side(edge.v, w_v))
}

fn combinatorial_edge(graph: &WeightedGraph, e: EdgeId) -> f64 {
    let edge = graph.edges()[e];
    4.0 - graph.adj(edge.u.0).len() as f64 - graph.adj(edge.v.0).len() as f64
}

/// Per-edge and per-node curvature, computed once per graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMap {
    pub mode: CurvatureMode,
    /// Indexed by [`EdgeId`].
    pub edge_curvature: Vec<f64>,
    pub node_curvature: Vec<f64>,
}

impl CurvatureMap {
    pub fn edge(&self, graph: &WeightedGraph, u: NodeId, v: NodeId) -> Result<f64> {
        graph.check_node(u)?;
        graph.check_node(v)?;
        graph
            .find_edge(u, v)
            .map(|e| self.edge_curvature[e])
            .ok_or(Error::EdgeNotFound(u, v))
    }

    pub fn node(&self, i: NodeId) -> Result<f64> {
        self.node_curvature
            .get(i.0)
            .copied()
            .ok_or(Error::NodeOutOfRange {
                node: i.0,
                node_count: self.node_curvature.len(),
            })
    }
}

pub fn compute_curvature_map(graph: &WeightedGraph, mode: CurvatureMode) -> CurvatureMap {
    let edge_curvature: Vec<f64> = (0..graph.edge_count())
        .into_par_iter()
        .map(|e| match mode {
            CurvatureMode::Weighted => weighted_edge(graph, e),
            CurvatureMode::Combinatorial => combinatorial_edge(graph, e),
        })
        .collect();
    // summed in ascending neighbor order, so the result is bit-reproducible
    let node_curvature = (0..graph.node_count())
        .map(|i| graph.adj(i).iter().map(|nb| edge_curvature[nb.edge]).sum())
        .collect();
    CurvatureMap {
        mode,
        edge_curvature,
        node_curvature,
    }
}

pub fn node_forman(graph: &WeightedGraph, map: &CurvatureMap, i: NodeId) -> Result<f64> {
    graph.check_node(i)?;
    map.node(i)
}
