//! Markov chains on the node set of a graph.
//!
//! Four kernels are provided:
//!
//! * `edge_curved`: move to neighbor `j` of `i` with probability proportional
//!   to `|F(i,j)| / d(j)`, normalized over the neighbors of `i`.
//! * `edge_uniform`: move to a uniformly chosen neighbor.
//! * `node_mh_curved`: Metropolis-Hastings with uniform-neighbor proposals and
//!   target density `|F(i)| / d(i)`.
//! * `node_mh_uniform`: the same with a constant target density.
//!
//! Curvature magnitudes are floored at `epsilon_floor` so that zero-curvature
//! regions stay reachable. Per-node tables are built once; a step draws one
//! `f64` (edge kernels) or two (MH kernels) from the chain's RNG.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{compute_curvature_map, CurvatureMap, CurvatureMode};
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};

/// Name of the generator behind every chain, recorded in run manifests.
pub const GENERATOR_NAME: &str = "rand_chacha::ChaCha8Rng::seed_from_u64";

pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-9;

/// Largest graph [`Sampler::transition_matrix`] will materialize.
pub const TRANSITION_MATRIX_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SamplerKind {
    EdgeCurved,
    EdgeUniform,
    NodeMhCurved,
    NodeMhUniform,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::EdgeCurved,
        SamplerKind::EdgeUniform,
        SamplerKind::NodeMhCurved,
        SamplerKind::NodeMhUniform,
    ];

    pub fn is_mh(self) -> bool {
        matches!(self, SamplerKind::NodeMhCurved | SamplerKind::NodeMhUniform)
    }

    pub fn is_curved(self) -> bool {
        matches!(self, SamplerKind::EdgeCurved | SamplerKind::NodeMhCurved)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::EdgeCurved => "edge_curved",
            SamplerKind::EdgeUniform => "edge_uniform",
            SamplerKind::NodeMhCurved => "node_mh_curved",
            SamplerKind::NodeMhUniform => "node_mh_uniform",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a chain starts: a fixed node, or a node drawn from the chain's RNG.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StartNode {
    Fixed(NodeId),
    #[default]
    Random,
}

impl fmt::Display for StartNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartNode::Fixed(n) => write!(f, "{n}"),
            StartNode::Random => f.write_str("random"),
        }
    }
}

impl FromStr for StartNode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("random") {
            return Ok(StartNode::Random);
        }
        s.parse::<usize>()
            .map(|i| StartNode::Fixed(NodeId(i)))
            .map_err(|_| format!("expected a node id or `random`, got {s:?}"))
    }
}

impl From<StartNode> for String {
    fn from(s: StartNode) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for StartNode {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub curvature_mode: CurvatureMode,
    pub epsilon_floor: f64,
    pub seed: u64,
    pub start: StartNode,
    pub max_steps: usize,
    /// Steps discarded before the first recorded visit.
    #[serde(default)]
    pub burn_in: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kind: SamplerKind::NodeMhCurved,
            curvature_mode: CurvatureMode::Combinatorial,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            seed: 0,
            start: StartNode::Random,
            max_steps: 1000,
            burn_in: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_floor >= 0.0 && self.epsilon_floor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_floor must be a non-negative number, got {}",
                self.epsilon_floor
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One realization of a chain. `visits[0]` is the start (after burn-in).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub config: SamplerConfig,
    pub start: NodeId,
    pub visits: Vec<NodeId>,
    pub distinct_count_at_step: Vec<usize>,
    /// Accepted MH proposals among recorded transitions; equals the number of
    /// transitions for edge kernels.
    pub accepted: usize,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }
}

/// Unnormalized per-node target density for the MH kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    values: Vec<f64>,
}

impl Target {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig(
                "target densities must be finite and non-negative".into(),
            ));
        }
        Ok(Target { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: NodeId) -> f64 {
        self.values[i.0]
    }

    /// The density normalized to sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        let total: f64 = self.values.iter().sum();
        self.values.iter().map(|v| v / total).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Curved,
    Uniform,
}

/// Curved: `max(|F(i)|, epsilon_floor) / d(i)`, zero on isolated nodes.
/// Uniform: one everywhere.
pub fn make_target(
    graph: &WeightedGraph,
    curvature: &CurvatureMap,
    kind: TargetKind,
    epsilon_floor: f64,
) -> Result<Target> {
    let values: Vec<f64> = match kind {
        TargetKind::Uniform => vec![1.0; graph.node_count()],
        TargetKind::Curved => (0..graph.node_count())
            .map(|i| match graph.adj(i).len() {
                0 => 0.0,
                d => curvature.node_curvature[i].abs().max(epsilon_floor) / d as f64,
            })
            .collect(),
    };
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateTarget);
    }
    Target::from_values(values)
}

/// Cumulative neighbor weights for the curved edge kernel, or `None` when the
/// kernel falls back to uniform (every incident `|F|` at or below the floor).
fn edge_curved_table(
    graph: &WeightedGraph,
    curvature: &CurvatureMap,
    i: usize,
    epsilon_floor: f64,
) -> Option<Vec<f64>> {
    let adj = graph.adj(i);
    if adj
        .iter()
        .all(|nb| curvature.edge_curvature[nb.edge].abs() <= epsilon_floor)
    {
        return None;
    }
    let mut acc = 0.0;
    Some(
        adj.iter()
            .map(|nb| {
                let f = curvature.edge_curvature[nb.edge].abs().max(epsilon_floor);
                acc += f / graph.adj(nb.node.0).len() as f64;
                acc
            })
            .collect(),
    )
}

/// Index chosen by a uniform draw `u` in `[0, 1)`.
fn select(table: Option<&[f64]>, degree: usize, u: f64) -> usize {
    match table {
        None => ((u * degree as f64) as usize).min(degree - 1),
        Some(cum) => {
            let total = cum[degree - 1];
            let t = u * total;
            let k = cum.partition_point(|&c| c <= t);
            if k < degree {
                k
            } else {
                // u * total rounded up to total: take the last positive-weight entry
                let mut k = degree - 1;
                while k > 0 && cum[k - 1] == cum[k] {
                    k -= 1;
                }
                k
            }
        }
    }
}

fn require_moves(graph: &WeightedGraph, current: NodeId) -> Result<()> {
    graph.check_node(current)?;
    if graph.adj(current.0).is_empty() {
        return Err(Error::IsolatedNode(current));
    }
    Ok(())
}

/// One step of the curvature-weighted edge kernel.
pub fn edge_curved_step<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    curvature: &CurvatureMap,
    current: NodeId,
    epsilon_floor: f64,
    rng: &mut R,
) -> Result<NodeId> {
    require_moves(graph, current)?;
    let table = edge_curved_table(graph, curvature, current.0, epsilon_floor);
    let adj = graph.adj(current.0);
    let u: f64 = rng.random();
    Ok(adj[select(table.as_deref(), adj.len(), u)].node)
}

/// One step of the uniform-neighbor edge kernel.
pub fn edge_uniform_step<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    current: NodeId,
    rng: &mut R,
) -> Result<NodeId> {
    require_moves(graph, current)?;
    let adj = graph.adj(current.0);
    let u: f64 = rng.random();
    Ok(adj[select(None, adj.len(), u)].node)
}

/// Acceptance probability for moving `current -> proposal` under uniform
/// neighbor proposals.
pub fn mh_acceptance(
    graph: &WeightedGraph,
    target: &Target,
    current: NodeId,
    proposal: NodeId,
) -> f64 {
    let gx = target.get(current);
    let gy = target.get(proposal);
    let dx = graph.adj(current.0).len() as f64;
    let dy = graph.adj(proposal.0).len() as f64;
    let ratio = (gy * dx) / (gx * dy);
    if ratio.is_nan() {
        0.0
    } else {
        ratio.min(1.0)
    }
}

/// One Metropolis-Hastings step. Returns the next node and whether the
/// proposal was accepted; on rejection the chain stays put.
pub fn mh_step<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    target: &Target,
    current: NodeId,
    rng: &mut R,
) -> Result<(NodeId, bool)> {
    require_moves(graph, current)?;
    if target.get(current) <= 0.0 {
        return Err(Error::ZeroDensity(current));
    }
    let adj = graph.adj(current.0);
    let proposal = adj[select(None, adj.len(), rng.random())].node;
    let u: f64 = rng.random();
    let alpha = mh_acceptance(graph, target, current, proposal);
    // strict comparison: a zero-probability proposal is never accepted
    if alpha >= 1.0 || u < alpha {
        Ok((proposal, true))
    } else {
        Ok((current, false))
    }
}

/// Dense row-stochastic transition matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

enum Kernel {
    EdgeCurved(Vec<Option<Vec<f64>>>),
    EdgeUniform,
    Mh(Target),
}

/// A kernel with its per-node tables precomputed for one graph.
pub struct Sampler<'g> {
    graph: &'g WeightedGraph,
    kind: SamplerKind,
    epsilon_floor: f64,
    kernel: Kernel,
}

impl<'g> Sampler<'g> {
    /// `curvature` is required for the curved kinds and ignored otherwise.
    pub fn new(
        graph: &'g WeightedGraph,
        curvature: Option<&CurvatureMap>,
        kind: SamplerKind,
        epsilon_floor: f64,
    ) -> Result<Self> {
        if !(epsilon_floor >= 0.0 && epsilon_floor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "invalid epsilon_floor {epsilon_floor}"
            )));
        }
        let need_curvature = || {
            curvature
                .ok_or_else(|| Error::InvalidConfig(format!("{kind} requires a curvature map")))
        };
        let kernel = match kind {
            SamplerKind::EdgeCurved => {
                let map = need_curvature()?;
                Kernel::EdgeCurved(
                    (0..graph.node_count())
                        .map(|i| {
                            if graph.adj(i).is_empty() {
                                None
                            } else {
                                edge_curved_table(graph, map, i, epsilon_floor)
                            }
                        })
                        .collect(),
                )
            }
            SamplerKind::EdgeUniform => Kernel::EdgeUniform,
            SamplerKind::NodeMhCurved => Kernel::Mh(make_target(
                graph,
                need_curvature()?,
                TargetKind::Curved,
                epsilon_floor,
            )?),
            SamplerKind::NodeMhUniform => {
                Kernel::Mh(Target::from_values(vec![1.0; graph.node_count()])?)
            }
        };
        Ok(Sampler {
            graph,
            kind,
            epsilon_floor,
            kernel,
        })
    }

    /// Builds the sampler described by `config`, computing curvature if needed.
    pub fn for_config(graph: &'g WeightedGraph, config: &SamplerConfig) -> Result<Self> {
        config.validate()?;
        let map = config
            .kind
            .is_curved()
            .then(|| compute_curvature_map(graph, config.curvature_mode));
        Sampler::new(graph, map.as_ref(), config.kind, config.epsilon_floor)
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn epsilon_floor(&self) -> f64 {
        self.epsilon_floor
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.graph
    }

    pub fn target(&self) -> Option<&Target> {
        match &self.kernel {
            Kernel::Mh(t) => Some(t),
            _ => None,
        }
    }

    /// Nodes a chain may start from: non-isolated, and with positive density
    /// for MH kernels.
    pub fn support(&self) -> Vec<NodeId> {
        self.graph
            .nodes()
            .filter(|&i| !self.graph.adj(i.0).is_empty())
            .filter(|&i| self.target().is_none_or(|t| t.get(i) > 0.0))
            .collect()
    }

    /// Advances one step; the flag reports MH acceptance (always true for edge kernels).
    pub fn step<R: Rng + ?Sized>(&self, current: NodeId, rng: &mut R) -> Result<(NodeId, bool)> {
        match &self.kernel {
            Kernel::EdgeCurved(tables) => {
                require_moves(self.graph, current)?;
                let adj = self.graph.adj(current.0);
                let u: f64 = rng.random();
                Ok((
                    adj[select(tables[current.0].as_deref(), adj.len(), u)].node,
                    true,
                ))
            }
            Kernel::EdgeUniform => edge_uniform_step(self.graph, current, rng).map(|n| (n, true)),
            Kernel::Mh(target) => mh_step(self.graph, target, current, rng),
        }
    }

    fn check_start(&self, start: NodeId) -> Result<()> {
        require_moves(self.graph, start)?;
        if let Some(t) = self.target() {
            if t.get(start) <= 0.0 {
                return Err(Error::ZeroDensity(start));
            }
        }
        Ok(())
    }

    pub fn run(&self, config: &SamplerConfig) -> Result<ChainTrace> {
        config.validate()?;
        if config.kind != self.kind || config.epsilon_floor != self.epsilon_floor {
            return Err(Error::InvalidConfig(format!(
                "config ({}, epsilon {}) does not match sampler ({}, epsilon {})",
                config.kind, config.epsilon_floor, self.kind, self.epsilon_floor
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut current = match config.start {
            StartNode::Fixed(i) => {
                self.check_start(i)?;
                i
            }
            StartNode::Random => {
                let support = self.support();
                if support.is_empty() {
                    return Err(Error::InvalidConfig(
                        "graph has no node a chain can start from".into(),
                    ));
                }
                support[rng.random_range(0..support.len())]
            }
        };
        for _ in 0..config.burn_in {
            current = self.step(current, &mut rng)?.0;
        }

        let mut seen = vec![false; self.graph.node_count()];
        let mut visits = Vec::with_capacity(config.max_steps);
        let mut distinct = Vec::with_capacity(config.max_steps);
        let mut accepted = 0;
        let mut count = 0;
        for k in 0..config.max_steps {
            if k > 0 {
                let (next, acc) = self.step(current, &mut rng)?;
                accepted += usize::from(acc);
                current = next;
            }
            if !seen[current.0] {
                seen[current.0] = true;
                count += 1;
            }
            visits.push(current);
            distinct.push(count);
        }

        Ok(ChainTrace {
            config: config.clone(),
            start: visits[0],
            visits,
            distinct_count_at_step: distinct,
            accepted,
        })
    }

    /// The exact kernel as a dense matrix.
    ///
    /// Isolated nodes get a unit self-loop. For MH kernels a node with zero
    /// density accepts every proposal.
    pub fn transition_matrix(&self) -> Result<TransitionMatrix> {
        let n = self.graph.node_count();
        if n > TRANSITION_MATRIX_LIMIT {
            return Err(Error::GraphTooLarge {
                node_count: n,
                limit: TRANSITION_MATRIX_LIMIT,
            });
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let adj = self.graph.adj(i);
            let row = &mut entries[i * n..(i + 1) * n];
            if adj.is_empty() {
                row[i] = 1.0;
                continue;
            }
            let d = adj.len() as f64;
            match &self.kernel {
                Kernel::EdgeUniform | Kernel::EdgeCurved(_) => {
                    let table = match &self.kernel {
                        Kernel::EdgeCurved(tables) => tables[i].as_deref(),
                        _ => None,
                    };
                    match table {
                        None => adj.iter().for_each(|nb| row[nb.node.0] = 1.0 / d),
                        Some(cum) => {
                            let total = cum[adj.len() - 1];
                            let mut prev = 0.0;
                            for (nb, &c) in adj.iter().zip(cum) {
                                row[nb.node.0] = (c - prev) / total;
                                prev = c;
                            }
                        }
                    }
                }
                Kernel::Mh(target) => {
                    let mut moved = 0.0;
                    for nb in adj {
                        let p = if target.get(NodeId(i)) > 0.0 {
                            mh_acceptance(self.graph, target, NodeId(i), nb.node) / d
                        } else {
                            1.0 / d
                        };
                        row[nb.node.0] = p;
                        moved += p;
                    }
                    row[i] = (1.0 - moved).max(0.0);
                }
            }
        }
        Ok(TransitionMatrix { n, entries })
    }
}

/// Runs one chain described by `config`.
pub fn run_chain(graph: &WeightedGraph, config: &SamplerConfig) -> Result<ChainTrace> {
    Sampler::for_config(graph, config)?.run(config)
}

pub fn build_transition_matrix(
    graph: &WeightedGraph,
    config: &SamplerConfig,
) -> Result<TransitionMatrix> {
    Sampler::for_config(graph, config)?.transition_matrix()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of chain `chain` under `master`: `master XOR splitmix64(chain)`.
pub fn chain_seed(master: u64, chain: u64) -> u64 {
    master ^ splitmix64(chain)
}

/// Fraction of recorded visits that landed on each node.
pub fn visit_frequencies(trace: &ChainTrace, node_count: usize) -> Vec<f64> {
    let mut counts = vec![0usize; node_count];
    for v in &trace.visits {
        counts[v.0] += 1;
    }
    let n = trace.visits.len() as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
