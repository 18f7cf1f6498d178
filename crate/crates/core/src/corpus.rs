//! Seeded graph generators for experiments and oracle sweeps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Color, ColoredBipartiteGraph, Edge};

/// Random square graph: each pair gets a red edge with probability `p_red`
/// and, independently, a blue edge with probability `p_blue`.
pub fn random_square_graph(
    n: usize,
    p_red: f64,
    p_blue: f64,
    rng: &mut ChaCha8Rng,
) -> ColoredBipartiteGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.random_bool(p_red) {
                edges.push(Edge::new(u, v, Color::Red));
            }
            if rng.random_bool(p_blue) {
                edges.push(Edge::new(u, v, Color::Blue));
            }
        }
    }
    ColoredBipartiteGraph::new(n, n, edges).expect("generator emits valid edges")
}

/// Random square graph guaranteed to contain a perfect matching: a random
/// permutation with random colors is planted, then noise edges are added.
pub fn random_graph_with_matching(
    n: usize,
    p_noise: f64,
    rng: &mut ChaCha8Rng,
) -> ColoredBipartiteGraph {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut edges = Vec::new();
    for (u, &v) in perm.iter().enumerate() {
        let color = if rng.random_bool(0.5) {
            Color::Red
        } else {
            Color::Blue
        };
        edges.push(Edge::new(u, v, color));
    }
    for u in 0..n {
        for v in 0..n {
            for color in [Color::Red, Color::Blue] {
                if edges.contains(&Edge::new(u, v, color)) {
                    continue;
                }
                if rng.random_bool(p_noise) {
                    edges.push(Edge::new(u, v, color));
                }
            }
        }
    }
    ColoredBipartiteGraph::new(n, n, edges).expect("generator emits valid edges")
}

/// Every square graph on `n + n` vertices: each of the `n^2` pairs
/// independently carries none, red, blue, or both edges, so there are
/// `4^(n^2)` graphs. Iterated in code order for reproducibility.
pub fn exhaustive_square_graphs(n: usize) -> impl Iterator<Item = ColoredBipartiteGraph> {
    let slots = n * n;
    assert!(
        2 * slots < usize::BITS as usize,
        "exhaustive sweep limited to tiny n"
    );
    (0..(1usize << (2 * slots))).map(move |code| graph_from_code(n, code))
}

/// Decodes two bits per pair: bit0 = red present, bit1 = blue present.
pub fn graph_from_code(n: usize, code: usize) -> ColoredBipartiteGraph {
    let mut edges = Vec::new();
    let mut slot = 0;
    for u in 0..n {
        for v in 0..n {
            let bits = (code >> (2 * slot)) & 3;
            if bits & 1 != 0 {
                edges.push(Edge::new(u, v, Color::Red));
            }
            if bits & 2 != 0 {
                edges.push(Edge::new(u, v, Color::Blue));
            }
            slot += 1;
        }
    }
    ColoredBipartiteGraph::new(n, n, edges).expect("decoded edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from;

    #[test]
    fn planted_matching_graphs_have_one() {
        let mut rng = rng_from(11);
        for n in [1usize, 3, 7, 20] {
            let g = random_graph_with_matching(n, 0.1, &mut rng);
            assert!(crate::matching::find_perfect_matching(&g).is_some());
        }
    }

    #[test]
    fn exhaustive_sweep_counts() {
        assert_eq!(exhaustive_square_graphs(1).count(), 4);
        assert_eq!(exhaustive_square_graphs(2).count(), 256);
    }

    #[test]
    fn same_seed_same_graph() {
        let a = random_square_graph(5, 0.4, 0.4, &mut rng_from(3));
        let b = random_square_graph(5, 0.4, 0.4, &mut rng_from(3));
        assert_eq!(a, b);
    }
}
