//! Property tests for the model-level invariants.

use proptest::prelude::*;

use parity_matching::corpus::graph_from_code;
use parity_matching::enumerate::{
    enumerate_labelings, enumerate_perfect_matchings, visit_perfect_matchings, EnumCaps,
};
use parity_matching::labeling::{
    edge_violates, red_parity_identity, violation_count, violation_edges, Labeling, ParityTarget,
};
use parity_matching::solver::solve_parity;
use parity_matching::{Color, ColoredBipartiteGraph, Edge};

fn arb_graph(max_n: usize) -> impl Strategy<Value = ColoredBipartiteGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let slots = 2 * n * n;
        (0usize..(1 << slots)).prop_map(move |code| graph_from_code(n, code))
    })
}

proptest! {
    // Every edge is either violating or consistent, never both, and
    // flipping all labels leaves the violation set unchanged.
    #[test]
    fn violation_set_is_flip_invariant(g in arb_graph(3), bits in any::<u32>()) {
        let n = g.square_n().unwrap();
        let left = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let right = (0..n).map(|j| bits >> (n + j) & 1 == 1).collect();
        let l = Labeling::new(left, right, ParityTarget::Odd);
        let viol = violation_edges(&g, &l).unwrap();
        for e in g.edges() {
            prop_assert_eq!(viol.contains(e), edge_violates(e, &l));
        }
        let flipped = violation_edges(&g, &l.flipped()).unwrap();
        prop_assert_eq!(viol, flipped);
    }

    // Violation counts of target-parity matchings against parity-valid
    // labelings are odd (and hence at least one) on arbitrary graphs.
    #[test]
    fn violation_count_parity(g in arb_graph(3), labeling_idx in any::<u32>()) {
        let caps = EnumCaps::default();
        let n = g.square_n().unwrap();
        for target in [ParityTarget::Odd, ParityTarget::Even] {
            let labelings = enumerate_labelings(n, target, &caps).unwrap();
            let l = &labelings[labeling_idx as usize % labelings.len()];
            for m in enumerate_perfect_matchings(&g, &caps).unwrap() {
                let v = violation_count(&g, &m, l).unwrap();
                if target.matches(m.red_count()) {
                    prop_assert_eq!(v % 2, 1);
                    prop_assert!(v >= 1);
                } else {
                    prop_assert_eq!(v % 2, 0);
                }
            }
        }
    }

    // The red-count identity holds on every consistent (matching, labeling)
    // pair: labelings consistent with a matching are exactly those built by
    // choosing one free bit per matching edge.
    #[test]
    fn identity_on_consistent_pairs(g in arb_graph(3), bits in any::<u32>()) {
        let caps = EnumCaps::default();
        let n = g.square_n().unwrap();
        for m in enumerate_perfect_matchings(&g, &caps).unwrap() {
            let mut left = vec![false; n];
            let mut right = vec![false; n];
            for (i, e) in m.edges().iter().enumerate() {
                let bit = bits >> (i % 32) & 1 == 1;
                left[e.u] = bit;
                right[e.v] = match e.color {
                    Color::Red => bit,
                    Color::Blue => !bit,
                };
            }
            let l = Labeling::new(left, right, ParityTarget::Odd);
            let (lhs, rhs) = red_parity_identity(&g, &m, &l).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    // Identical inputs give identical solver results.
    #[test]
    fn solver_is_deterministic(g in arb_graph(3)) {
        for target in [ParityTarget::Odd, ParityTarget::Even] {
            let a = solve_parity(&g, target).unwrap();
            let b = solve_parity(&g, target).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    // Labeling parity classes partition all bit patterns.
    #[test]
    fn labeling_classes_partition(n in 1usize..=4) {
        let caps = EnumCaps::default();
        let odd = enumerate_labelings(n, ParityTarget::Odd, &caps).unwrap();
        let even = enumerate_labelings(n, ParityTarget::Even, &caps).unwrap();
        prop_assert_eq!(odd.len(), 1 << (2 * n - 1));
        prop_assert_eq!(odd.len() + even.len(), 1 << (2 * n));
        for l in odd.iter().chain(even.iter()) {
            prop_assert!(l.is_parity_valid());
        }
    }
}

#[test]
fn perfect_matching_counts_on_complete_double() {
    // n! * 2^n perfect matchings for n <= 5.
    let caps = EnumCaps::default();
    for n in 1..=5usize {
        let g = ColoredBipartiteGraph::complete_double(n).unwrap();
        let mut count = 0u64;
        visit_perfect_matchings(&g, &caps, |_| {
            count += 1;
            true
        })
        .unwrap();
        let expect = (1..=n as u64).product::<u64>() * (1u64 << n);
        assert_eq!(count, expect, "n = {n}");
    }
}

#[test]
fn planted_matching_is_found() {
    let g = ColoredBipartiteGraph::new(
        3,
        3,
        vec![
            Edge::new(0, 1, Color::Red),
            Edge::new(1, 2, Color::Blue),
            Edge::new(2, 0, Color::Red),
            Edge::new(0, 0, Color::Blue),
        ],
    )
    .unwrap();
    let m = parity_matching::matching::find_perfect_matching(&g).unwrap();
    assert!(m.is_perfect_on(&g));
}
