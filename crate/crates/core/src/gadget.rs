//! Reduction from two-colored multigraphs to simple graphs.
//!
//! Each red/blue parallel pair `(u, v)` is replaced by two length-3 paths:
//! `u–x_b–y_b–v` (all blue) and `u–x_r–y_r–v` where only `(u, x_r)` is red.
//! Single-color edges are copied unchanged. Perfect matchings correspond
//! bijectively and the red count is preserved edge-for-edge.

use std::collections::BTreeMap;

use crate::graph::{Color, ColoredBipartiteGraph, Edge};
use crate::matching::{Matching, MatchingError};

/// Per-pair bookkeeping: the four new vertices and six new edges that
/// replace a red/blue parallel pair.
#[derive(Clone, Debug)]
pub struct PairGadget {
    pub u: usize,
    pub v: usize,
    /// Right-side vertex adjacent to `u` on the red path.
    pub x_r: usize,
    /// Left-side vertex adjacent to `v` on the red path.
    pub y_r: usize,
    pub x_b: usize,
    pub y_b: usize,
    pub edges: [Edge; 6],
}

#[derive(Clone, Debug)]
pub struct GadgetMap {
    pub simple_graph: ColoredBipartiteGraph,
    /// Keyed by the original `(u, v)` pair.
    pub pair_gadgets: BTreeMap<(usize, usize), PairGadget>,
}

/// Builds the simple graph and the pair-to-gadget correspondence.
pub fn gadget_simple_graph(g: &ColoredBipartiteGraph) -> GadgetMap {
    let mut edges: Vec<Edge> = Vec::new();
    let mut pair_gadgets = BTreeMap::new();
    let mut next_left = g.n_left();
    let mut next_right = g.n_right();

    let mut doubled: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter(|e| e.color == Color::Red)
        .filter(|e| g.has_edge(e.u, e.v, Color::Blue))
        .map(|e| (e.u, e.v))
        .collect();
    doubled.sort_unstable();

    for e in g.edges() {
        if !(e.color == Color::Red && g.has_edge(e.u, e.v, Color::Blue))
            && !(e.color == Color::Blue && g.has_edge(e.u, e.v, Color::Red))
        {
            edges.push(*e);
        }
    }

    for &(u, v) in &doubled {
        let x_r = next_right;
        let x_b = next_right + 1;
        next_right += 2;
        let y_r = next_left;
        let y_b = next_left + 1;
        next_left += 2;
        let new_edges = [
            Edge::new(u, x_r, Color::Red),
            Edge::new(y_r, x_r, Color::Blue),
            Edge::new(y_r, v, Color::Blue),
            Edge::new(u, x_b, Color::Blue),
            Edge::new(y_b, x_b, Color::Blue),
            Edge::new(y_b, v, Color::Blue),
        ];
        edges.extend_from_slice(&new_edges);
        pair_gadgets.insert(
            (u, v),
            PairGadget {
                u,
                v,
                x_r,
                y_r,
                x_b,
                y_b,
                edges: new_edges,
            },
        );
    }

    let simple_graph = ColoredBipartiteGraph::new(next_left, next_right, edges)
        .expect("gadget construction yields valid simple graph");
    debug_assert!(simple_graph.edges().iter().all(|e| !(simple_graph.has_edge(
        e.u,
        e.v,
        Color::Red
    ) && simple_graph.has_edge(
        e.u,
        e.v,
        Color::Blue
    ))));
    GadgetMap {
        simple_graph,
        pair_gadgets,
    }
}

impl GadgetMap {
    /// The explicit matching correspondence: a perfect matching of the
    /// multigraph maps to one of the simple graph with the same red count.
    pub fn push_matching(&self, m: &Matching) -> Result<Matching, MatchingError> {
        let mut edges: Vec<Edge> = Vec::new();
        for e in m.edges() {
            if !self.pair_gadgets.contains_key(&(e.u, e.v)) {
                edges.push(*e);
            }
        }
        for (&(u, v), gadget) in &self.pair_gadgets {
            let takes_red = m.contains(&Edge::new(u, v, Color::Red));
            let takes_blue = m.contains(&Edge::new(u, v, Color::Blue));
            if takes_red {
                edges.push(Edge::new(u, gadget.x_r, Color::Red));
                edges.push(Edge::new(gadget.y_r, v, Color::Blue));
                edges.push(Edge::new(gadget.y_b, gadget.x_b, Color::Blue));
            } else if takes_blue {
                edges.push(Edge::new(u, gadget.x_b, Color::Blue));
                edges.push(Edge::new(gadget.y_b, v, Color::Blue));
                edges.push(Edge::new(gadget.y_r, gadget.x_r, Color::Blue));
            } else {
                edges.push(Edge::new(gadget.y_r, gadget.x_r, Color::Blue));
                edges.push(Edge::new(gadget.y_b, gadget.x_b, Color::Blue));
            }
        }
        Matching::new(edges)
    }

    /// Inverse of `push_matching` on perfect matchings of the simple graph.
    pub fn pull_matching(&self, m: &Matching) -> Result<Matching, MatchingError> {
        let mut edges: Vec<Edge> = Vec::new();
        for e in m.edges() {
            let original = e.u < self.original_n_left() && e.v < self.original_n_right();
            if original && !self.pair_gadgets.contains_key(&(e.u, e.v)) {
                edges.push(*e);
            }
        }
        for (&(u, v), gadget) in &self.pair_gadgets {
            if m.contains(&Edge::new(u, gadget.x_r, Color::Red)) {
                edges.push(Edge::new(u, v, Color::Red));
            } else if m.contains(&Edge::new(u, gadget.x_b, Color::Blue)) {
                edges.push(Edge::new(u, v, Color::Blue));
            }
        }
        Matching::new(edges)
    }

    fn original_n_left(&self) -> usize {
        self.simple_graph.n_left() - 2 * self.pair_gadgets.len()
    }

    fn original_n_right(&self) -> usize {
        self.simple_graph.n_right() - 2 * self.pair_gadgets.len()
    }
}
