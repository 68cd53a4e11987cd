//! CSV writers. Every table has a one-line header; floats use Rust's
//! shortest round-trip formatting so output is byte-stable.

use std::io::{self, Write};

use crate::curvature::CurvatureMap;
use crate::eval::{BackboneRanking, ConvergenceCurve};
use crate::graph::{NodeId, WeightedGraph};
use crate::netstats::StatVector;
use crate::sampler::ChainTrace;

pub fn write_edge_curvature<W: Write>(
    graph: &WeightedGraph,
    map: &CurvatureMap,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "edge_u,edge_v,forman")?;
    for (e, f) in graph.edges().iter().zip(&map.edge_curvature) {
        writeln!(out, "{},{},{}", e.u, e.v, f)?;
    }
    Ok(())
}

pub fn write_node_curvature<W: Write>(map: &CurvatureMap, mut out: W) -> io::Result<()> {
    writeln!(out, "node,forman")?;
    for (i, f) in map.node_curvature.iter().enumerate() {
        writeln!(out, "{i},{f}")?;
    }
    Ok(())
}

pub fn write_labels<W: Write>(labels: &[String], mut out: W) -> io::Result<()> {
    writeln!(out, "node,label")?;
    for (i, l) in labels.iter().enumerate() {
        writeln!(out, "{i},{l}")?;
    }
    Ok(())
}

/// `step,node,distinct_count`, with step 0 the start node.
pub fn write_trace<W: Write>(trace: &ChainTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "step,node,distinct_count")?;
    for (k, (v, d)) in trace
        .visits
        .iter()
        .zip(&trace.distinct_count_at_step)
        .enumerate()
    {
        writeln!(out, "{k},{v},{d}")?;
    }
    Ok(())
}

/// `node,bc,cc,strength,wcc`; `stats` must be in that order.
pub fn write_stats<W: Write>(stats: &[StatVector; 4], mut out: W) -> io::Result<()> {
    writeln!(out, "node,bc,cc,strength,wcc")?;
    for i in 0..stats[0].values.len() {
        writeln!(
            out,
            "{i},{},{},{},{}",
            stats[0].values[i], stats[1].values[i], stats[2].values[i], stats[3].values[i]
        )?;
    }
    Ok(())
}

/// `n,mse,mean_distinct` with `n` counting samples from 1.
pub fn write_curve<W: Write>(curve: &ConvergenceCurve, mut out: W) -> io::Result<()> {
    writeln!(out, "n,mse,mean_distinct")?;
    for (k, (m, d)) in curve.mse.iter().zip(&curve.mean_distinct).enumerate() {
        writeln!(out, "{},{m},{d}", k + 1)?;
    }
    Ok(())
}

/// `node,visits,rank` for every node; unvisited nodes are ranked after
/// visited ones in id order. `node_map` translates to original ids.
pub fn write_backbone<W: Write>(
    ranking: &BackboneRanking,
    node_map: Option<&[NodeId]>,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "node,visits,rank")?;
    let unvisited = (0..ranking.node_count())
        .filter(|&i| ranking.visits[i] == 0)
        .map(NodeId);
    for (rank, node) in ranking.ranked.iter().copied().chain(unvisited).enumerate() {
        let original = node_map.map_or(node, |m| m[node.0]);
        writeln!(out, "{},{},{}", original, ranking.visits[node.0], rank + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{compute_curvature_map, CurvatureMode};

    #[test]
    fn curvature_tables() {
        let g = WeightedGraph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let m = compute_curvature_map(&g, CurvatureMode::Combinatorial);
        let mut buf = Vec::new();
        write_edge_curvature(&g, &m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "edge_u,edge_v,forman\n0,1,1\n1,2,1\n"
        );
        let mut buf = Vec::new();
        write_node_curvature(&m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "node,forman\n0,1\n1,2\n2,1\n"
        );
    }

    #[test]
    fn backbone_table_maps_ids() {
        let r = BackboneRanking {
            sampler: "s".into(),
            visits: vec![0, 3, 5],
            ranked: vec![NodeId(2), NodeId(1)],
        };
        let mut buf = Vec::new();
        write_backbone(&r, Some(&[NodeId(10), NodeId(11), NodeId(12)]), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "node,visits,rank\n12,5,1\n11,3,2\n10,0,3\n"
        );
    }
}
