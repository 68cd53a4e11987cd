//! Test support: random graphs and independent oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use forman_mcmc::graph::{NodeId, WeightedGraph};
use forman_mcmc::sampler::TransitionMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus each remaining pair with probability `p`.
/// Edge weights come from `weight`.
pub fn random_connected<R: Rng>(
    rng: &mut R,
    n: usize,
    p: f64,
    mut weight: impl FnMut(&mut R) -> f64,
) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        let w = weight(rng);
        edges.push((u, v, w));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.random_bool(p) {
                let w = weight(rng);
                edges.push((u, v, w));
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

/// G(n, p) without connectivity guarantees, unit weights.
pub fn random_gnp<R: Rng>(rng: &mut R, n: usize, p: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    WeightedGraph::unweighted(n, edges).unwrap()
}

pub fn unit(_: &mut ChaCha8Rng) -> f64 {
    1.0
}

pub fn small_int(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(1..=4) as f64
}

/// Direct evaluation of the weighted edge formula.
pub fn forman_reference(g: &WeightedGraph, u: NodeId, v: NodeId) -> f64 {
    let w_e = g.edges()[g.find_edge(u, v).unwrap()].weight;
    let wu = g.node_weights()[u.0];
    let wv = g.node_weights()[v.0];
    let mut f = wu / w_e + wv / w_e;
    for nb in g.neighbors(u).unwrap() {
        if nb.node != v {
            f -= wu / (w_e * nb.weight).sqrt();
        }
    }
    for nb in g.neighbors(v).unwrap() {
        if nb.node != u {
            f -= wv / (w_e * nb.weight).sqrt();
        }
    }
    w_e * f
}

/// Normalized `max(|F(i)|, eps) / d(i)` from [`forman_reference`].
pub fn curved_law(g: &WeightedGraph, eps: f64) -> Vec<f64> {
    let raw: Vec<f64> = g
        .nodes()
        .map(|i| {
            let nb = g.neighbors(i).unwrap();
            let f: f64 = nb.iter().map(|n| forman_reference(g, i, n.node)).sum();
            f.abs().max(eps) / nb.len() as f64
        })
        .collect();
    normalize(&raw)
}

/// All-pairs distances by Floyd-Warshall (`INFINITY` when unreachable).
pub fn floyd_warshall(g: &WeightedGraph, weighted: bool) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.edges() {
        let w = if weighted { e.weight } else { 1.0 };
        d[e.u.0][e.v.0] = w;
        d[e.v.0][e.u.0] = w;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Enumerates every shortest path from `s` to `t` explicitly.
pub fn shortest_paths_between(
    g: &WeightedGraph,
    dist: &[Vec<f64>],
    weighted: bool,
    s: usize,
    t: usize,
) -> Vec<Vec<usize>> {
    fn walk(
        g: &WeightedGraph,
        dist: &[Vec<f64>],
        weighted: bool,
        s: usize,
        t: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let x = *path.last().unwrap();
        if x == t {
            out.push(path.clone());
            return;
        }
        for nb in g.neighbors(NodeId(x)).unwrap() {
            let y = nb.node.0;
            let w = if weighted { nb.weight } else { 1.0 };
            // y lies on a shortest s-t path through x
            if dist[s][x] + w == dist[s][y] && dist[s][y] + dist[y][t] == dist[s][t] {
                path.push(y);
                walk(g, dist, weighted, s, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if dist[s][t].is_finite() {
        walk(g, dist, weighted, s, t, &mut vec![s], &mut out);
    }
    out
}

/// Betweenness by explicit enumeration of all shortest paths of all unordered pairs.
pub fn betweenness_oracle(g: &WeightedGraph, weighted: bool) -> Vec<f64> {
    let n = g.node_count();
    let dist = floyd_warshall(g, weighted);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths_between(g, &dist, weighted, s, t);
            if paths.is_empty() {
                continue;
            }
            let mut through = vec![0usize; n];
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    through[v] += 1;
                }
            }
            for v in 0..n {
                bc[v] += through[v] as f64 / paths.len() as f64;
            }
        }
    }
    bc
}

pub fn closeness_oracle(g: &WeightedGraph, weighted: bool) -> Vec<f64> {
    let dist = floyd_warshall(g, weighted);
    dist.iter()
        .enumerate()
        .map(|(i, row)| {
            let reach: Vec<f64> = row
                .iter()
                .enumerate()
                .filter(|&(j, d)| j != i && d.is_finite())
                .map(|(_, &d)| d)
                .collect();
            if reach.is_empty() {
                0.0
            } else {
                1.0 / reach.iter().sum::<f64>()
            }
        })
        .collect()
}

/// Classical local clustering: closed neighbor pairs over possible pairs.
pub fn local_clustering_oracle(g: &WeightedGraph) -> Vec<f64> {
    g.nodes()
        .map(|i| {
            let nb: Vec<NodeId> = g.neighbors(i).unwrap().iter().map(|n| n.node).collect();
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut closed = 0;
            for a in 0..k {
                for b in a + 1..k {
                    if g.has_edge(nb[a], nb[b]) {
                        closed += 1;
                    }
                }
            }
            closed as f64 / (k * (k - 1) / 2) as f64
        })
        .collect()
}

/// Stationary vector of an irreducible chain by Grassmann-Taksar-Heyman
/// elimination. Only off-diagonal entries are read and no subtraction occurs,
/// so every component keeps small relative error even when the distribution
/// spans many orders of magnitude.
pub fn stationary(p: &TransitionMatrix) -> Vec<f64> {
    let n = p.size();
    let mut a = DMatrix::<f64>::from_fn(n, n, |i, j| if i == j { 0.0 } else { p.get(i, j) });
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[(k, j)]).sum();
        assert!(s > 0.0, "chain is reducible");
        for i in 0..k {
            a[(i, k)] /= s;
        }
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    a[(i, j)] += a[(i, k)] * a[(k, j)];
                }
            }
        }
    }
    let mut x = DVector::<f64>::zeros(n);
    x[0] = 1.0;
    for k in 1..n {
        x[k] = (0..k).map(|i| x[i] * a[(i, k)]).sum();
    }
    let total = x.sum();
    (x / total).iter().copied().collect()
}

/// Same quantity by a dense LU solve of `(P^T - I) pi = 0`, `sum(pi) = 1`.
/// Accurate only when the distribution is not too skewed.
pub fn stationary_lu(p: &TransitionMatrix) -> Vec<f64> {
    let n = p.size();
    let mut a = DMatrix::<f64>::from_fn(n, n, |i, j| p.get(j, i) - if i == j { 1.0 } else { 0.0 });
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .expect("irreducible chain has a unique stationary vector");
    x.iter().copied().collect()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
