mod common;

use common::forman_reference;

use forman_mcmc::curvature::{
    compute_curvature_map, edge_forman, edge_forman_combinatorial, node_forman, CurvatureMode,
};
use forman_mcmc::{NodeId, WeightedGraph};
use proptest::prelude::*;

fn arb_weighted() -> impl Strategy<Value = (Vec<f64>, Vec<(usize, usize, f64)>)> {
    (2usize..16).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let m = pairs.len();
        (
            proptest::collection::vec(0.1f64..5.0, n),
            Just(pairs),
            proptest::collection::vec(proptest::option::weighted(0.4, 0.1f64..5.0), m),
        )
            .prop_map(|(nw, pairs, ws)| {
                let edges = pairs
                    .into_iter()
                    .zip(ws)
                    .filter_map(|((u, v), w)| w.map(|w| (u, v, w)))
                    .collect();
                (nw, edges)
            })
    })
}

proptest! {
    #[test]
    fn matches_direct_formula((nw, edges) in arb_weighted()) {
        let g = WeightedGraph::with_node_weights(nw, edges).unwrap();
        for e in g.edges() {
            let got = edge_forman(&g, e.u, e.v).unwrap();
            let want = forman_reference(&g, e.u, e.v);
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn symmetric_in_endpoints((nw, edges) in arb_weighted()) {
        let g = WeightedGraph::with_node_weights(nw, edges).unwrap();
        for e in g.edges() {
            prop_assert_eq!(edge_forman(&g, e.u, e.v).unwrap(), edge_forman(&g, e.v, e.u).unwrap());
        }
    }

    #[test]
    fn scales_linearly_with_node_weights((nw, edges) in arb_weighted(), c in 0.1f64..10.0) {
        let g = WeightedGraph::with_node_weights(nw.clone(), edges.clone()).unwrap();
        let h = WeightedGraph::with_node_weights(nw.iter().map(|w| w * c).collect(), edges).unwrap();
        for e in g.edges() {
            let a = edge_forman(&g, e.u, e.v).unwrap();
            let b = edge_forman(&h, e.u, e.v).unwrap();
            prop_assert!((b - c * a).abs() <= 1e-9 * (1.0 + (c * a).abs()));
        }
    }

    #[test]
    fn invariant_under_edge_weight_scaling((nw, edges) in arb_weighted(), c in 0.1f64..10.0) {
        let g = WeightedGraph::with_node_weights(nw.clone(), edges.clone()).unwrap();
        let h = WeightedGraph::with_node_weights(nw, edges.into_iter().map(|(u, v, w)| (u, v, w * c))).unwrap();
        for e in g.edges() {
            let a = edge_forman(&g, e.u, e.v).unwrap();
            let b = edge_forman(&h, e.u, e.v).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn unit_weights_reduce_to_degree_form(seed in any::<u64>(), n in 2usize..30, p in 0.05f64..0.6) {
        let g = common::random_gnp(&mut common::rng(seed), n, p);
        for e in g.edges() {
            let du = g.degree(e.u).unwrap() as f64;
            let dv = g.degree(e.v).unwrap() as f64;
            let w = edge_forman(&g, e.u, e.v).unwrap();
            prop_assert!((w - (4.0 - du - dv)).abs() <= 1e-12);
            prop_assert_eq!(edge_forman_combinatorial(&g, e.u, e.v).unwrap(), 4.0 - du - dv);
        }
    }

    #[test]
    fn node_sum_is_twice_edge_sum((nw, edges) in arb_weighted()) {
        let g = WeightedGraph::with_node_weights(nw, edges).unwrap();
        for mode in [CurvatureMode::Weighted, CurvatureMode::Combinatorial] {
            let map = compute_curvature_map(&g, mode);
            let nodes: f64 = map.node_curvature.iter().sum();
            let edges: f64 = map.edge_curvature.iter().sum();
            prop_assert!((nodes - 2.0 * edges).abs() <= 1e-9 * (1.0 + edges.abs()));
            for i in g.nodes() {
                prop_assert_eq!(node_forman(&g, &map, i).unwrap(), map.node(i).unwrap());
            }
        }
    }
}

#[test]
fn two_hub_example() {
    let g = WeightedGraph::unweighted(
        9,
        [
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (4, 5),
            (5, 6),
            (5, 7),
            (5, 8),
        ],
    )
    .unwrap();
    let map = compute_curvature_map(&g, CurvatureMode::Weighted);
    assert_eq!(map.edge(&g, NodeId(0), NodeId(4)).unwrap(), -2.0);
    assert_eq!(map.edge(&g, NodeId(4), NodeId(5)).unwrap(), -2.0);
    assert_eq!(map.edge(&g, NodeId(0), NodeId(1)).unwrap(), -1.0);
    assert_eq!(map.edge(&g, NodeId(5), NodeId(8)).unwrap(), -1.0);
    assert_eq!(map.node(NodeId(0)).unwrap(), -5.0);
    assert_eq!(map.node(NodeId(4)).unwrap(), -4.0);
    assert_eq!(map.node(NodeId(1)).unwrap(), -1.0);
}

#[test]
fn missing_edge_is_an_error() {
    let g = WeightedGraph::unweighted(3, [(0, 1)]).unwrap();
    assert!(edge_forman(&g, NodeId(0), NodeId(2)).is_err());
    assert!(edge_forman(&g, NodeId(0), NodeId(7)).is_err());
}
