//! Property-based tests for invariants that must hold on every graph:
//! file round-trips, monotone and submodular spread, and adaptive
//! policies dominating non-adaptive ones.

use adgap::diffusion::spread_exact;
use adgap::graph::{parse_graph, write_graph};
use adgap::policies::{marginals, opt_adaptive, opt_nonadaptive};
use adgap::{Caps, InfluenceGraph, NodeSet};
use proptest::prelude::*;

fn caps() -> Caps {
    Caps::default()
}

/// Random directed graph with up to `max_n` nodes and `max_m` edges,
/// every edge carrying its own probability.
fn directed_graph(max_n: u32, max_m: usize) -> impl Strategy<Value = InfluenceGraph> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            let pairs: Vec<(u32, u32)> = (0..n)
                .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
                .collect();
            let cap = max_m.min(pairs.len());
            proptest::sample::subsequence(pairs, 0..=cap).prop_flat_map(move |chosen| {
                let len = chosen.len();
                (
                    Just(n),
                    Just(chosen),
                    prop::collection::vec(0.0..=1.0f64, len),
                )
            })
        })
        .prop_map(|(n, chosen, probs)| {
            let edges: Vec<(u32, u32, f64)> = chosen
                .into_iter()
                .zip(probs)
                .map(|((u, v), p)| (u, v, p))
                .collect();
            InfluenceGraph::from_directed_edges(n, &edges).unwrap()
        })
}

/// Random undirected graph: unordered node pairs, one probability per
/// direction.
fn undirected_graph(max_n: u32, max_pairs: usize) -> impl Strategy<Value = InfluenceGraph> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            let pairs: Vec<(u32, u32)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let cap = max_pairs.min(pairs.len());
            proptest::sample::subsequence(pairs, 0..=cap).prop_flat_map(move |chosen| {
                let len = chosen.len();
                (
                    Just(n),
                    Just(chosen),
                    prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), len),
                )
            })
        })
        .prop_map(|(n, chosen, probs)| {
            let pairs: Vec<(u32, u32, f64, f64)> = chosen
                .into_iter()
                .zip(probs)
                .map(|((u, v), (p_uv, p_vu))| (u, v, p_uv, p_vu))
                .collect();
            InfluenceGraph::from_undirected_edges(n, &pairs).unwrap()
        })
}

fn mask(bits: u64, n: u32) -> NodeSet {
    NodeSet::from_bits(bits & ((1u64 << n) - 1))
}

proptest! {
    #[test]
    fn directed_files_round_trip(g in directed_graph(8, 12)) {
        let parsed = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(parsed, g);
    }

    #[test]
    fn undirected_files_round_trip(g in undirected_graph(8, 8)) {
        let parsed = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(parsed, g);
    }

    #[test]
    fn spread_is_monotone_in_the_seed_set(
        g in directed_graph(6, 10),
        small_bits in any::<u64>(),
        extra in 0u32..6,
    ) {
        let small = mask(small_bits, g.n());
        let big = small.insert(extra % g.n());
        let lo = spread_exact(&g, small, caps()).unwrap();
        let hi = spread_exact(&g, big, caps()).unwrap();
        prop_assert!(hi >= lo - 1e-12, "{lo} > {hi}");
    }

    #[test]
    fn spread_is_submodular_in_the_seed_set(
        g in directed_graph(6, 10),
        big_bits in any::<u64>(),
        small_bits in any::<u64>(),
        extra in 0u32..6,
    ) {
        let big = mask(big_bits, g.n());
        let small = mask(big_bits & small_bits, g.n());
        let v = extra % g.n();
        prop_assume!(!big.contains(v));
        let gain_small = spread_exact(&g, small.insert(v), caps()).unwrap()
            - spread_exact(&g, small, caps()).unwrap();
        let gain_big = spread_exact(&g, big.insert(v), caps()).unwrap()
            - spread_exact(&g, big, caps()).unwrap();
        prop_assert!(gain_small >= gain_big - 1e-9, "{gain_small} < {gain_big}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adaptive_dominates_nonadaptive(
        g in directed_graph(5, 8),
        k in 1u32..=3,
    ) {
        prop_assume!(k <= g.n());
        let tree = opt_adaptive(&g, k, caps()).unwrap();
        let fixed = opt_nonadaptive(&g, k, caps()).unwrap();
        let opt_a = tree.value();
        let opt_n = fixed.value(k);
        prop_assert!(opt_a >= opt_n - 1e-9, "{opt_a} < {opt_n}");
        prop_assert!(opt_a <= f64::from(g.n()) + 1e-9);

        let x = marginals(&tree).unwrap();
        let sum: f64 = x.x.iter().sum();
        prop_assert!((sum - f64::from(k)).abs() <= 1e-9, "marginals sum {sum}");
        prop_assert!(x.x.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v)));
    }
}
