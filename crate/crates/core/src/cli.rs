//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 on I/O or data errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::curvature::{compute_curvature_map, CurvatureMode};
use crate::error::Error;
use crate::eval::{run_experiment, ExperimentPlan, StartPolicy};
use crate::graph::WeightedGraph;
use crate::io::{load_edge_list, GraphMeta, LoadOptions};
use crate::netstats::{compute_statistic, mean_statistic, PathMode, StatKind};
use crate::report;
use crate::sampler::{
    Sampler, SamplerConfig, SamplerKind, StartNode, DEFAULT_EPSILON_FLOOR, GENERATOR_NAME,
};
use log::{debug, info};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "forman-mcmc",
    version,
    about = "Forman-curvature MCMC sampling of networks"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Edge list: `u v [w]` per line, `%`/`#` comments.
    #[arg(long)]
    graph: PathBuf,
    /// Column delimiter (default: any whitespace).
    #[arg(long)]
    delimiter: Option<char>,
    /// Ignore the weight column.
    #[arg(long)]
    unweighted: bool,
    /// Weight assigned to every node.
    #[arg(long, default_value_t = 1.0)]
    node_weight: f64,
}

impl GraphArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            delimiter: self.delimiter,
            weighted: !self.unweighted,
            default_node_weight: self.node_weight,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pair {
    /// Curved vs uniform Metropolis-Hastings.
    Node,
    /// Curved vs uniform edge kernel.
    Edge,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Edge and node Forman curvature.
    Curvature {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = CurvatureMode::Combinatorial)]
        curvature_mode: CurvatureMode,
    },
    /// Run one Markov chain and export its trace.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = SamplerKind::NodeMhCurved)]
        kind: SamplerKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Start node id or `random`.
        #[arg(long, default_value = "random")]
        start: StartNode,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, value_enum, default_value_t = CurvatureMode::Combinatorial)]
        curvature_mode: CurvatureMode,
        #[arg(long, default_value_t = DEFAULT_EPSILON_FLOOR)]
        epsilon_floor: f64,
    },
    /// Per-node statistics and their full-graph means.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = PathMode::Hop)]
        path_mode: PathMode,
    },
    /// Multi-chain MSE convergence of curved against uniform samplers.
    Converge {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// JSON plan, or a manifest written by a previous run. Flags below override it.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        chains: Option<usize>,
        /// Steps per chain (default: 20 x node count).
        #[arg(long)]
        steps: Option<usize>,
        /// Sampler pair for the default plan.
        #[arg(long, value_enum)]
        pair: Option<Pair>,
        #[arg(long, value_enum)]
        curvature_mode: Option<CurvatureMode>,
        #[arg(long)]
        epsilon_floor: Option<f64>,
        #[arg(long, value_enum)]
        path_mode: Option<PathMode>,
        #[arg(long)]
        burn_in: Option<usize>,
        /// Analyze the largest connected component of a disconnected graph.
        #[arg(long)]
        largest_component: bool,
    },
}

/// Written next to every set of outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub graph: GraphMeta,
    pub graph_checksum: String,
    pub rng_generator: String,
    pub master_seed: Option<u64>,
    pub config: serde_json::Value,
    pub created_unix: u64,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
    }
}

fn execute(command: Command) -> CliResult<()> {
    let threads = match &command {
        Command::Curvature { output, .. }
        | Command::Sample { output, .. }
        | Command::Stats { output, .. }
        | Command::Converge { output, .. } => output.threads,
    };
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Data(e.to_string()))?;
            pool.install(|| dispatch(command))
        }
        None => dispatch(command),
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Curvature {
            graph,
            output,
            curvature_mode,
        } => cmd_curvature(&graph, &output.out, curvature_mode),
        Command::Sample {
            graph,
            output,
            kind,
            seed,
            steps,
            start,
            burn_in,
            curvature_mode,
            epsilon_floor,
        } => {
            let config = SamplerConfig {
                kind,
                curvature_mode,
                epsilon_floor,
                seed,
                start,
                max_steps: steps,
                burn_in,
            };
            cmd_sample(&graph, &output.out, &config)
        }
        Command::Stats {
            graph,
            output,
            path_mode,
        } => cmd_stats(&graph, &output.out, path_mode),
        Command::Converge {
            graph,
            output,
            plan,
            seed,
            chains,
            steps,
            pair,
            curvature_mode,
            epsilon_floor,
            path_mode,
            burn_in,
            largest_component,
        } => {
            let (g, meta) = load(&graph)?;
            let mut resolved = match &plan {
                Some(path) => read_plan(path)?,
                None => ExperimentPlan::default_for(g.node_count(), 0),
            };
            if let Some(s) = steps {
                resolved.max_steps = s;
            }
            if let Some(p) = pair {
                resolved.samplers = match p {
                    Pair::Node => vec![
                        SamplerKind::NodeMhCurved.into(),
                        SamplerKind::NodeMhUniform.into(),
                    ],
                    Pair::Edge => vec![
                        SamplerKind::EdgeCurved.into(),
                        SamplerKind::EdgeUniform.into(),
                    ],
                };
            }
            if let Some(s) = seed {
                resolved.master_seed = s;
            }
            if let Some(c) = chains {
                resolved.n_chains = c;
            }
            if let Some(m) = curvature_mode {
                resolved.curvature_mode = m;
            }
            if let Some(e) = epsilon_floor {
                resolved.epsilon_floor = e;
            }
            if let Some(m) = path_mode {
                resolved.path_mode = m;
            }
            if let Some(b) = burn_in {
                resolved.burn_in = b;
            }
            resolved.largest_component |= largest_component;
            cmd_converge(&g, &meta, &output.out, &resolved)
        }
    }
}

fn load(args: &GraphArgs) -> CliResult<(WeightedGraph, GraphMeta)> {
    if !(args.node_weight > 0.0 && args.node_weight.is_finite()) {
        return Err(Failure::Usage("--node-weight must be positive".into()));
    }
    let loaded =
        load_edge_list(&args.graph, &args.options()).map_err(|e| Failure::Data(e.to_string()))?;
    info!(
        "loaded {}: {} nodes, {} edges, max degree {}",
        args.graph.display(),
        loaded.1.node_count,
        loaded.1.edge_count,
        loaded.1.max_degree
    );
    Ok(loaded)
}

/// Accepts a bare plan or a manifest containing one under `config`.
fn read_plan(path: &Path) -> CliResult<ExperimentPlan> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let plan_value = match value.get("config") {
        Some(inner) if value.get("tool").is_some() => inner.clone(),
        _ => value,
    };
    serde_json::from_value(plan_value)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn write_file<F>(dir: &Path, name: &str, outputs: &mut Vec<String>, body: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&path, e))?;
    debug!("wrote {}", path.display());
    outputs.push(name.to_string());
    Ok(())
}

fn write_manifest(
    dir: &Path,
    command: &str,
    graph: &WeightedGraph,
    meta: &GraphMeta,
    master_seed: Option<u64>,
    config: serde_json::Value,
    outputs: Vec<String>,
) -> CliResult<()> {
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        graph: meta.clone(),
        graph_checksum: graph.checksum(),
        rng_generator: GENERATOR_NAME.to_string(),
        master_seed,
        config,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        outputs,
    };
    let mut sink = Vec::new();
    write_file(dir, "manifest.json", &mut sink, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    })
}

fn cmd_curvature(args: &GraphArgs, out: &Path, mode: CurvatureMode) -> CliResult<()> {
    let (g, meta) = load(args)?;
    let map = compute_curvature_map(&g, mode);
    prepare_out(out)?;
    let mut outputs = Vec::new();
    write_file(out, "edge_curvature.csv", &mut outputs, |w| {
        report::write_edge_curvature(&g, &map, w)
    })?;
    write_file(out, "node_curvature.csv", &mut outputs, |w| {
        report::write_node_curvature(&map, w)
    })?;
    write_file(out, "labels.csv", &mut outputs, |w| {
        report::write_labels(&meta.labels, w)
    })?;
    write_manifest(
        out,
        "curvature",
        &g,
        &meta,
        None,
        json!({ "curvature_mode": mode, "node_weight": args.node_weight, "weighted": !args.unweighted }),
        outputs,
    )
}

fn cmd_sample(args: &GraphArgs, out: &Path, config: &SamplerConfig) -> CliResult<()> {
    let (g, meta) = load(args)?;
    config.validate()?;
    if let StartNode::Fixed(i) = config.start {
        g.check_node(i)?;
    }
    let sampler = Sampler::for_config(&g, config)?;
    let trace = sampler.run(config)?;
    prepare_out(out)?;
    let mut outputs = Vec::new();
    write_file(out, "trace.csv", &mut outputs, |w| {
        report::write_trace(&trace, w)
    })?;
    write_file(out, "labels.csv", &mut outputs, |w| {
        report::write_labels(&meta.labels, w)
    })?;
    write_manifest(
        out,
        "sample",
        &g,
        &meta,
        Some(config.seed),
        serde_json::to_value(config).expect("config serializes"),
        outputs,
    )
}

fn cmd_stats(args: &GraphArgs, out: &Path, path_mode: PathMode) -> CliResult<()> {
    let (g, meta) = load(args)?;
    let stats = StatKind::ALL.map(|k| compute_statistic(&g, k, path_mode));
    let mut means = serde_json::Map::new();
    for s in &stats {
        let m = mean_statistic(s, None)?;
        means.insert(s.kind.as_str().to_string(), json!(m));
    }
    let summary = json!({
        "path_mode": path_mode,
        "node_count": g.node_count(),
        "means": means,
        "closeness_undefined": stats[1].undefined,
    });
    prepare_out(out)?;
    let mut outputs = Vec::new();
    write_file(out, "stats.csv", &mut outputs, |w| {
        report::write_stats(&stats, w)
    })?;
    write_file(out, "summary.json", &mut outputs, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        writeln!(w)
    })?;
    write_file(out, "labels.csv", &mut outputs, |w| {
        report::write_labels(&meta.labels, w)
    })?;
    write_manifest(
        out,
        "stats",
        &g,
        &meta,
        None,
        json!({ "path_mode": path_mode }),
        outputs,
    )
}

/// File name of the curve for one sampler and statistic.
pub fn curve_file_name(sampler: &str, statistic: StatKind) -> String {
    format!("{sampler}_{statistic}.csv")
}

fn cmd_converge(
    g: &WeightedGraph,
    meta: &GraphMeta,
    out: &Path,
    plan: &ExperimentPlan,
) -> CliResult<()> {
    plan.validate()?;
    if let StartPolicy::FixedList(list) = &plan.start_policy {
        for &i in list {
            g.check_node(i)?;
        }
    }
    let result = run_experiment(g, plan)?;
    prepare_out(out)?;
    let mut outputs = Vec::new();
    for curve in &result.curves {
        let name = curve_file_name(&curve.sampler, curve.statistic);
        write_file(out, &name, &mut outputs, |w| report::write_curve(curve, w))?;
    }
    let node_map = result.node_map.as_deref();
    for (i, ranking) in result.backbones.iter().enumerate() {
        if i == 0 {
            write_file(out, "backbone.csv", &mut outputs, |w| {
                report::write_backbone(ranking, node_map, w)
            })?;
        }
        let name = format!("{}_backbone.csv", ranking.sampler);
        write_file(out, &name, &mut outputs, |w| {
            report::write_backbone(ranking, node_map, w)
        })?;
    }
    write_file(out, "labels.csv", &mut outputs, |w| {
        report::write_labels(&meta.labels, w)
    })?;
    let expected: serde_json::Map<String, serde_json::Value> = result
        .statistics
        .iter()
        .map(|s| {
            let m = mean_statistic(s, None).unwrap_or(f64::NAN);
            (s.kind.as_str().to_string(), json!(m))
        })
        .collect();
    let mut outputs_and_summary = outputs;
    let summary = json!({ "expected": expected, "start_nodes": result.start_nodes });
    write_file(out, "summary.json", &mut outputs_and_summary, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        writeln!(w)
    })?;
    write_manifest(
        out,
        "converge",
        g,
        meta,
        Some(plan.master_seed),
        serde_json::to_value(plan).expect("plan serializes"),
        outputs_and_summary,
    )
}
