//! Multi-chain convergence experiments.
//!
//! For chain `c` and sample size `n`, the estimator is the mean of a
//! full-graph statistic over the distinct nodes among the first `n` visits.
//! `MSE_n` averages its squared deviation from the full-graph mean over all
//! chains. Node visit counts pooled over chains give a backbone ranking.

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{compute_curvature_map, CurvatureMode};
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::netstats::{compute_statistic, mean_statistic, PathMode, StatKind, StatVector};
use crate::sampler::{
    chain_seed, ChainTrace, Sampler, SamplerConfig, SamplerKind, StartNode, DEFAULT_EPSILON_FLOOR,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub label: String,
    pub kind: SamplerKind,
}

impl From<SamplerKind> for SamplerSpec {
    fn from(kind: SamplerKind) -> Self {
        SamplerSpec {
            label: kind.as_str().to_string(),
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPolicy {
    /// Starts drawn uniformly without replacement (cycling if there are more
    /// chains than eligible nodes).
    #[default]
    DistinctRandom,
    /// Chain `c` starts at `list[c % list.len()]`.
    FixedList(Vec<NodeId>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub samplers: Vec<SamplerSpec>,
    pub statistics: Vec<StatKind>,
    pub n_chains: usize,
    pub max_steps: usize,
    #[serde(default)]
    pub start_policy: StartPolicy,
    pub master_seed: u64,
    #[serde(default)]
    pub curvature_mode: CurvatureMode,
    #[serde(default = "default_epsilon")]
    pub epsilon_floor: f64,
    #[serde(default)]
    pub path_mode: PathMode,
    #[serde(default)]
    pub burn_in: usize,
    /// Restrict to the largest connected component instead of failing on
    /// disconnected input.
    #[serde(default)]
    pub largest_component: bool,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON_FLOOR
}

pub const DEFAULT_CHAINS: usize = 50;
pub const DEFAULT_STEPS_PER_NODE: usize = 20;

impl ExperimentPlan {
    /// Curved against uniform Metropolis-Hastings, all four statistics,
    /// 50 chains of `20 * node_count` steps.
    pub fn default_for(node_count: usize, master_seed: u64) -> Self {
        ExperimentPlan {
            samplers: vec![
                SamplerKind::NodeMhCurved.into(),
                SamplerKind::NodeMhUniform.into(),
            ],
            statistics: StatKind::ALL.to_vec(),
            n_chains: DEFAULT_CHAINS,
            max_steps: DEFAULT_STEPS_PER_NODE * node_count.max(1),
            start_policy: StartPolicy::DistinctRandom,
            master_seed,
            curvature_mode: CurvatureMode::Combinatorial,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            path_mode: PathMode::Hop,
            burn_in: 0,
            largest_component: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_chains < 2 {
            return bad("n_chains must be at least 2");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if self.statistics.is_empty() {
            return bad("at least one statistic is required");
        }
        if self.samplers.is_empty() {
            return bad("at least one sampler is required");
        }
        for (i, s) in self.samplers.iter().enumerate() {
            if s.label.is_empty() || self.samplers[..i].iter().any(|t| t.label == s.label) {
                return bad("sampler labels must be non-empty and unique");
            }
        }
        if matches!(&self.start_policy, StartPolicy::FixedList(l) if l.is_empty()) {
            return bad("fixed start list is empty");
        }
        if !(self.epsilon_floor >= 0.0 && self.epsilon_floor.is_finite()) {
            return bad("epsilon_floor must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub sampler: String,
    pub statistic: StatKind,
    /// Full-graph mean `E[Z]`.
    pub expected: f64,
    /// `mse[n - 1]` is the MSE after `n` samples.
    pub mse: Vec<f64>,
    pub mean_distinct: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackboneRanking {
    pub sampler: String,
    /// Visits per node pooled over chains.
    pub visits: Vec<u64>,
    /// Visited nodes, most visited first, ties by ascending id.
    pub ranked: Vec<NodeId>,
}

impl BackboneRanking {
    pub fn from_traces(sampler: &str, node_count: usize, traces: &[ChainTrace]) -> Self {
        let mut visits = vec![0u64; node_count];
        for t in traces {
            for v in &t.visits {
                visits[v.0] += 1;
            }
        }
        let mut ranked: Vec<NodeId> = (0..node_count)
            .filter(|&i| visits[i] > 0)
            .map(NodeId)
            .collect();
        ranked.sort_by_key(|i| (std::cmp::Reverse(visits[i.0]), *i));
        BackboneRanking {
            sampler: sampler.to_string(),
            visits,
            ranked,
        }
    }

    pub fn node_count(&self) -> usize {
        self.visits.len()
    }
}

/// The `ceil(fraction * |V|)` most visited nodes; unvisited nodes follow in id order.
pub fn extract_backbone(ranking: &BackboneRanking, fraction: f64) -> Result<Vec<NodeId>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidFraction(fraction));
    }
    let n = ranking.node_count();
    if n == 0 {
        return Err(Error::EmptyNodeSet);
    }
    // absorb rounding in products like 0.1 * 30
    let k = ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let unvisited = (0..n).filter(|&i| ranking.visits[i] == 0).map(NodeId);
    Ok(ranking
        .ranked
        .iter()
        .copied()
        .chain(unvisited)
        .take(k)
        .collect())
}

/// Mean of `stat` over the distinct nodes among the first `n` visits.
pub fn estimator_mean(stat: &StatVector, trace: &ChainTrace, n: usize) -> Result<f64> {
    if n == 0 || n > trace.visits.len() {
        return Err(Error::InvalidConfig(format!(
            "sample size {n} outside 1..={}",
            trace.visits.len()
        )));
    }
    mean_statistic(stat, Some(&trace.visits[..n]))
}

/// Estimator after every prefix of `trace`.
///
/// Each time a new node appears the mean is recomputed over the visited set
/// in ascending id order, matching [`mean_statistic`] bit for bit.
pub fn estimator_path(stat: &StatVector, trace: &ChainTrace) -> Vec<f64> {
    let mut seen = vec![false; stat.values.len()];
    let mut count = 0usize;
    let mut current = 0.0;
    trace
        .visits
        .iter()
        .map(|v| {
            if !seen[v.0] {
                seen[v.0] = true;
                count += 1;
                let total: f64 = stat
                    .values
                    .iter()
                    .zip(&seen)
                    .filter(|(_, &s)| s)
                    .map(|(x, _)| x)
                    .sum();
                current = total / count as f64;
            }
            current
        })
        .collect()
}

/// Running mean in a fixed order; exact when every input is equal.
fn running_mean(acc: &mut [f64], values: impl Iterator<Item = f64>, count_before: usize) {
    let k = (count_before + 1) as f64;
    for (m, x) in acc.iter_mut().zip(values) {
        *m += (x - *m) / k;
    }
}

pub fn convergence_curve(
    label: &str,
    stat: &StatVector,
    traces: &[ChainTrace],
) -> Result<ConvergenceCurve> {
    let expected = mean_statistic(stat, None)?;
    let steps = traces.iter().map(ChainTrace::len).min().unwrap_or(0);
    let mut mse = vec![0.0; steps];
    let mut mean_distinct = vec![0.0; steps];
    for (c, trace) in traces.iter().enumerate() {
        let path = estimator_path(stat, trace);
        running_mean(
            &mut mse,
            path.iter().map(|z| (z - expected) * (z - expected)),
            c,
        );
        running_mean(
            &mut mean_distinct,
            trace.distinct_count_at_step.iter().map(|&d| d as f64),
            c,
        );
    }
    Ok(ConvergenceCurve {
        sampler: label.to_string(),
        statistic: stat.kind,
        expected,
        mse,
        mean_distinct,
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub curves: Vec<ConvergenceCurve>,
    pub backbones: Vec<BackboneRanking>,
    /// Start node of each chain (shared by every sampler).
    pub start_nodes: Vec<NodeId>,
    pub statistics: Vec<StatVector>,
    /// Original node id for each analyzed node when the largest component
    /// was selected.
    pub node_map: Option<Vec<NodeId>>,
    pub traces: Vec<Vec<ChainTrace>>,
}

impl ExperimentResult {
    pub fn curve(&self, sampler: &str, statistic: StatKind) -> Option<&ConvergenceCurve> {
        self.curves
            .iter()
            .find(|c| c.sampler == sampler && c.statistic == statistic)
    }
}

fn choose_starts(
    plan: &ExperimentPlan,
    eligible: &[NodeId],
    node_count: usize,
) -> Result<Vec<NodeId>> {
    match &plan.start_policy {
        StartPolicy::FixedList(list) => {
            if let Some(bad) = list.iter().find(|i| i.0 >= node_count) {
                return Err(Error::NodeOutOfRange {
                    node: bad.0,
                    node_count,
                });
            }
            Ok((0..plan.n_chains).map(|c| list[c % list.len()]).collect())
        }
        StartPolicy::DistinctRandom => {
            if eligible.is_empty() {
                return Err(Error::InvalidConfig(
                    "no node is a valid start for every sampler".into(),
                ));
            }
            let mut pool = eligible.to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(plan.master_seed);
            pool.shuffle(&mut rng);
            Ok((0..plan.n_chains).map(|c| pool[c % pool.len()]).collect())
        }
    }
}

pub fn run_experiment(graph: &WeightedGraph, plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;

    let components = graph.component_count();
    let (owned, node_map) = if components > 1 {
        if !plan.largest_component {
            return Err(Error::Disconnected { components });
        }
        let keep = graph.largest_component();
        warn!(
            "graph has {components} components; using the largest ({} of {} nodes)",
            keep.len(),
            graph.node_count()
        );
        let (sub, map) = graph.induced_subgraph(&keep)?;
        (Some(sub), Some(map))
    } else {
        (None, None)
    };
    let graph = owned.as_ref().unwrap_or(graph);

    let statistics: Vec<StatVector> = plan
        .statistics
        .iter()
        .map(|&k| compute_statistic(graph, k, plan.path_mode))
        .collect();
    let curvature = plan
        .samplers
        .iter()
        .any(|s| s.kind.is_curved())
        .then(|| compute_curvature_map(graph, plan.curvature_mode));

    let samplers: Vec<Sampler> = plan
        .samplers
        .iter()
        .map(|s| Sampler::new(graph, curvature.as_ref(), s.kind, plan.epsilon_floor))
        .collect::<Result<_>>()?;
    let eligible: Vec<NodeId> = graph
        .nodes()
        .filter(|&i| samplers.iter().all(|s| s.support().contains(&i)))
        .collect();
    let start_nodes = choose_starts(plan, &eligible, graph.node_count())?;

    let mut curves = Vec::new();
    let mut backbones = Vec::new();
    let mut all_traces = Vec::new();
    for (spec, sampler) in plan.samplers.iter().zip(&samplers) {
        let traces: Vec<ChainTrace> = start_nodes
            .par_iter()
            .enumerate()
            .map(|(c, &start)| {
                sampler.run(&SamplerConfig {
                    kind: spec.kind,
                    curvature_mode: plan.curvature_mode,
                    epsilon_floor: plan.epsilon_floor,
                    seed: chain_seed(plan.master_seed, c as u64),
                    start: StartNode::Fixed(start),
                    max_steps: plan.max_steps,
                    burn_in: plan.burn_in,
                })
            })
            .collect::<Result<_>>()?;
        info!(
            "{}: {} chains of {} steps",
            spec.label, plan.n_chains, plan.max_steps
        );
        for stat in &statistics {
            curves.push(convergence_curve(&spec.label, stat, &traces)?);
        }
        backbones.push(BackboneRanking::from_traces(
            &spec.label,
            graph.node_count(),
            &traces,
        ));
        all_traces.push(traces);
    }

    Ok(ExperimentResult {
        curves,
        backbones,
        start_nodes,
        statistics,
        node_map,
        traces: all_traces,
    })
}
