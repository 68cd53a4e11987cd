//! Edge-list reading and writing.
//!
//! Data lines are `u v [w ...]`, split on whitespace or on a configured
//! delimiter. Lines starting with `%` or `#` are comments; a KONECT header
//! declaring `asym` is rejected as directed input. Columns past the weight
//! (KONECT timestamps) are ignored.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// `None` splits on any whitespace.
    pub delimiter: Option<char>,
    /// Read the third column as the edge weight when present.
    pub weighted: bool,
    pub default_node_weight: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: None,
            weighted: true,
            default_node_weight: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphMeta {
    pub name: String,
    pub source_path: PathBuf,
    pub node_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    /// Original label of each dense node id.
    #[serde(skip)]
    pub labels: Vec<String>,
}

impl GraphMeta {
    pub fn describe(
        graph: &WeightedGraph,
        name: &str,
        source_path: &Path,
        labels: Vec<String>,
    ) -> Self {
        GraphMeta {
            name: name.to_string(),
            source_path: source_path.to_path_buf(),
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
            max_degree: graph.max_degree(),
            labels,
        }
    }
}

pub fn load_edge_list(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<(WeightedGraph, GraphMeta)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (graph, labels) = read_edge_list(BufReader::new(file), options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let meta = GraphMeta::describe(&graph, &name, path, labels);
    Ok((graph, meta))
}

/// Parses an edge list, returning the graph and the original label of each node.
///
/// Integer labels are ordered numerically; otherwise labels keep their order
/// of first appearance.
pub fn read_edge_list<R: BufRead>(
    reader: R,
    options: &LoadOptions,
) -> Result<(WeightedGraph, Vec<String>)> {
    let mut raw: Vec<(usize, String, String, f64)> = Vec::new();
    let mut seen_pairs = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed
            .strip_prefix('%')
            .or_else(|| trimmed.strip_prefix('#'))
        {
            if raw.is_empty() && comment.split_whitespace().next() == Some("asym") {
                return Err(Error::Directed);
            }
            continue;
        }

        let fields: Vec<&str> = match options.delimiter {
            Some(d) => trimmed
                .split(d)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect(),
            None => trimmed.split_whitespace().collect(),
        };
        if fields.len() < 2 {
            return Err(parse_err(lineno, "expected at least two columns"));
        }
        let (u, v) = (fields[0], fields[1]);
        if u == v {
            return Err(parse_err(lineno, format!("self-loop on {u}")));
        }
        let weight = match fields.get(2) {
            Some(w) if options.weighted => w
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("invalid weight {w:?}")))?,
            _ => 1.0,
        };
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(parse_err(lineno, format!("non-positive weight {weight}")));
        }
        let key = if u < v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        };
        if !seen_pairs.insert(key) {
            return Err(parse_err(lineno, format!("duplicate edge {u} {v}")));
        }
        raw.push((lineno, u.to_string(), v.to_string(), weight));
    }

    let labels = order_labels(&raw);
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let edges = raw
        .iter()
        .map(|(_, u, v, w)| (index[u.as_str()], index[v.as_str()], *w));
    let graph =
        WeightedGraph::with_node_weights(vec![options.default_node_weight; labels.len()], edges)?;
    Ok((graph, labels))
}

fn order_labels(raw: &[(usize, String, String, f64)]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut labels: Vec<String> = Vec::new();
    for (_, u, v, _) in raw {
        for l in [u, v] {
            if seen.insert(l.as_str()) {
                labels.push(l.clone());
            }
        }
    }
    let numeric: Option<Vec<u64>> = labels.iter().map(|l| l.parse::<u64>().ok()).collect();
    if let Some(mut nums) = numeric {
        nums.sort_unstable();
        // keep the original spelling; "01" and "1" cannot both occur without colliding numerically
        let by_num: HashMap<u64, &String> = labels
            .iter()
            .map(|l| (l.parse::<u64>().unwrap(), l))
            .collect();
        if by_num.len() == labels.len() {
            return nums.iter().map(|n| by_num[n].clone()).collect();
        }
    }
    labels
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Writes `graph` as a tab-separated weighted edge list using `labels` when given.
pub fn write_edge_list<W: Write>(
    graph: &WeightedGraph,
    labels: Option<&[String]>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "% sym posweighted")?;
    writeln!(
        out,
        "% {} {} {}",
        graph.edge_count(),
        graph.node_count(),
        graph.node_count()
    )?;
    let name = |i: usize| match labels {
        Some(l) => l[i].clone(),
        None => i.to_string(),
    };
    for e in graph.edges() {
        writeln!(out, "{}\t{}\t{}", name(e.u.0), name(e.v.0), e.weight)?;
    }
    Ok(())
}
