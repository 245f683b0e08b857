mod common;

use common::{brute_betweenness, nodal_potentials};
use fracnet_core::graph::{
    betweenness, current_flow, extract_backbone, laplacian, laplacian_pseudoinverse,
    NetworkGraph, BACKBONE_EPS,
};
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (3..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        (Just(n), proptest::collection::vec(any::<bool>(), m)).prop_map(move |(n, mask)| {
            let edges = pairs.iter().zip(mask).filter(|(_, k)| *k).map(|(e, _)| *e).collect();
            (n, edges)
        })
    })
}

/// Fracture graph with connected s/t attachments and a guaranteed s–t path.
fn arb_connected(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<usize>, Vec<usize>)> {
    arb_graph(max_n).prop_flat_map(|(n, mut edges)| {
        // A spanning chain keeps every fracture connected.
        for i in 0..n - 1 {
            if !edges.contains(&(i, i + 1)) {
                edges.push((i, i + 1));
            }
        }
        (
            Just(n),
            Just(edges),
            proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n),
            proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn betweenness_matches_enumeration((n, edges) in arb_graph(8)) {
        let g = NetworkGraph::from_parts(n, &edges, &[0], &[0]).unwrap();
        let fast = betweenness(&g, false);
        let slow = brute_betweenness(n, &edges);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-12, "{fast:?} vs {slow:?}");
        }
    }

    #[test]
    fn betweenness_with_boundary_matches_enumeration((n, edges, inlet, outlet) in arb_connected(6)) {
        let g = NetworkGraph::from_parts(n, &edges, &inlet, &outlet).unwrap();
        let fast = betweenness(&g, true);
        let slow = brute_betweenness(n + 2, g.edges());
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn current_flow_matches_nodal_analysis((n, edges, inlet, outlet) in arb_connected(8)) {
        let g = NetworkGraph::from_parts(n, &edges, &inlet, &outlet).unwrap();
        let flow = current_flow(&g).unwrap();
        let p = nodal_potentials(g.node_count(), g.edges(), g.source(), g.target());
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            prop_assert!((flow.edge_currents[e] - (p[u] - p[v]).abs()).abs() < 1e-9);
        }
        for i in 0..n {
            let expect: f64 = g.edges().iter()
                .filter(|&&(u, v)| u == i || v == i)
                .map(|&(u, v)| 0.5 * (p[u] - p[v]).abs())
                .sum();
            prop_assert!((flow.node_centrality[i] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn kirchhoff_conservation((n, edges, inlet, outlet) in arb_connected(12)) {
        let g = NetworkGraph::from_parts(n, &edges, &inlet, &outlet).unwrap();
        let flow = current_flow(&g).unwrap();
        let p = &flow.potentials;
        let mut net = vec![0.0; g.node_count()];
        for &(u, v) in g.edges() {
            net[u] += p[u] - p[v];
            net[v] += p[v] - p[u];
        }
        for x in &net[..n] {
            prop_assert!(x.abs() <= 1e-10);
        }
        prop_assert!((net[g.source()] - 1.0).abs() <= 1e-10);
        prop_assert!((net[g.target()] + 1.0).abs() <= 1e-10);
        let bp = extract_backbone(&g, &flow, BACKBONE_EPS);
        prop_assert_eq!(bp.primary.len() + bp.secondary.len(), n);
        prop_assert!(bp.primary.iter().all(|i| !bp.secondary.contains(i)));
    }

    #[test]
    fn relabeling_permutes_features(
        (n, edges, inlet, outlet) in arb_connected(8),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut fracnet_core::seed::rng(seed));
        let g = NetworkGraph::from_parts(n, &edges, &inlet, &outlet).unwrap();
        let relabel = |v: &usize| perm[*v];
        let pe: Vec<_> = edges.iter().map(|(u, v)| (perm[*u], perm[*v])).collect();
        let h = NetworkGraph::from_parts(
            n,
            &pe,
            &inlet.iter().map(relabel).collect::<Vec<_>>(),
            &outlet.iter().map(relabel).collect::<Vec<_>>(),
        ).unwrap();
        let (bg, bh) = (betweenness(&g, false), betweenness(&h, false));
        let (cg, ch) = (current_flow(&g).unwrap(), current_flow(&h).unwrap());
        for i in 0..n {
            prop_assert!((bg[i] - bh[perm[i]]).abs() < 1e-12);
            prop_assert!((cg.node_centrality[i] - ch.node_centrality[perm[i]]).abs() < 1e-9);
        }
    }
}

#[test]
fn wheatstone_mesh_matches_direct_solve() {
    // s - a, s - b, a - b (bridge), a - c, b - c... then c - t.
    let g = NetworkGraph::from_parts(3, &[(0, 1), (0, 2), (1, 2)], &[0, 1], &[2]).unwrap();
    let flow = current_flow(&g).unwrap();
    let p = nodal_potentials(g.node_count(), g.edges(), g.source(), g.target());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        assert!((flow.edge_currents[e] - (p[u] - p[v]).abs()).abs() < 1e-10);
    }
}

#[test]
fn pseudoinverse_on_large_random_graph() {
    use rand::Rng;
    let n = 500;
    let mut rng = fracnet_core::seed::rng(99);
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for _ in 0..1500 {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let l = laplacian(n, &edges);
    let lp = laplacian_pseudoinverse(&l);
    assert!((&l * &lp * &l - &l).amax() < 1e-9);
    assert!((&lp - lp.transpose()).amax() < 1e-9);
}
