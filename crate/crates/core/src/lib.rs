//! Curvature-driven Markov chain Monte Carlo on weighted networks.
//!
//! Graph Forman curvature enters sampling in two ways: as the weight of each
//! step in an edge-based random walk, and as the target density of a
//! node-based Metropolis-Hastings crawler. The [`eval`] harness measures how
//! fast sampled-node means of centrality statistics converge to their
//! full-network values, against uniform baselines.
//!
//! ```
//! use forman_mcmc::curvature::{compute_curvature_map, CurvatureMode};
//! use forman_mcmc::graph::{NodeId, WeightedGraph};
//!
//! let star = WeightedGraph::unweighted(6, (1..=5).map(|leaf| (0, leaf))).unwrap();
//! let map = compute_curvature_map(&star, CurvatureMode::Combinatorial);
//! assert_eq!(map.node(NodeId(0)).unwrap(), -10.0);
//! ```

pub mod cli;
pub mod curvature;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod netstats;
pub mod report;
pub mod sampler;

pub use error::{Error, Result};
pub use graph::{NodeId, WeightedGraph};
