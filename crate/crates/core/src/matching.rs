//! Matchings, maximum bipartite matching and Hall-type non-existence
//! witnesses.

use thiserror::Error;

use crate::graph::{Color, ColoredBipartiteGraph, Edge, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("edges ({0},{1}) and ({2},{3}) share a vertex")]
    SharedVertex(usize, usize, usize, usize),
}

/// A set of colored edges with at most one edge per vertex. Kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn new(mut edges: Vec<Edge>) -> Result<Self, MatchingError> {
        edges.sort_unstable();
        for i in 0..edges.len() {
            for j in (i + 1)..edges.len() {
                if edges[i].u == edges[j].u || edges[i].v == edges[j].v {
                    return Err(MatchingError::SharedVertex(
                        edges[i].u, edges[i].v, edges[j].u, edges[j].v,
                    ));
                }
            }
        }
        Ok(Matching { edges })
    }

    pub fn empty() -> Self {
        Matching { edges: Vec::new() }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn red_count(&self) -> usize {
        self.edges.iter().filter(|e| e.color == Color::Red).count()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    pub fn partner_of_left(&self, u: usize) -> Option<(usize, Color)> {
        self.edges.iter().find(|e| e.u == u).map(|e| (e.v, e.color))
    }

    pub fn partner_of_right(&self, v: usize) -> Option<(usize, Color)> {
        self.edges.iter().find(|e| e.v == v).map(|e| (e.u, e.color))
    }

    /// Perfect-matching predicate: every vertex of `g` covered and every
    /// edge present in `g`.
    pub fn is_perfect_on(&self, g: &ColoredBipartiteGraph) -> bool {
        if g.n_left() != g.n_right() || self.edges.len() != g.n_left() {
            return false;
        }
        let mut left = vec![false; g.n_left()];
        let mut right = vec![false; g.n_right()];
        for e in &self.edges {
            if e.u >= g.n_left() || e.v >= g.n_right() || !g.has_edge(e.u, e.v, e.color) {
                return false;
            }
            left[e.u] = true;
            right[e.v] = true;
        }
        left.into_iter().all(|b| b) && right.into_iter().all(|b| b)
    }

    /// Symmetric difference with an alternating edge set (matching rotation).
    pub fn toggled(&self, flips: &[Edge]) -> Result<Matching, MatchingError> {
        let mut edges: Vec<Edge> = self.edges.clone();
        for f in flips {
            match edges.iter().position(|e| e == f) {
                Some(i) => {
                    edges.swap_remove(i);
                }
                None => edges.push(*f),
            }
        }
        Matching::new(edges)
    }
}

/// Deterministic augmenting-path maximum matching (left vertices ascending,
/// neighbours ascending). Edge colors in the result prefer red when both
/// parallel edges exist.
pub fn maximum_matching(g: &ColoredBipartiteGraph) -> Matching {
    let adj: Vec<Vec<usize>> = (0..g.n_left()).map(|u| g.neighbors_of_left(u)).collect();
    let mut right_match: Vec<Option<usize>> = vec![None; g.n_right()];

    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        right_match: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &v in &adj[u] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            match right_match[v] {
                None => {
                    right_match[v] = Some(u);
                    return true;
                }
                Some(w) => {
                    if augment(w, adj, right_match, visited) {
                        right_match[v] = Some(u);
                        return true;
                    }
                }
            }
        }
        false
    }

    for u in 0..g.n_left() {
        let mut visited = vec![false; g.n_right()];
        augment(u, &adj, &mut right_match, &mut visited);
    }

    let mut edges = Vec::new();
    for (v, matched) in right_match.iter().enumerate() {
        if let Some(u) = *matched {
            let color = if g.has_edge(u, v, Color::Red) {
                Color::Red
            } else {
                Color::Blue
            };
            edges.push(Edge::new(u, v, color));
        }
    }
    Matching::new(edges).expect("augmenting paths produce disjoint edges")
}

/// A perfect matching if one exists.
pub fn find_perfect_matching(g: &ColoredBipartiteGraph) -> Option<Matching> {
    if g.n_left() != g.n_right() {
        return None;
    }
    let m = maximum_matching(g);
    (m.len() == g.n_left()).then_some(m)
}

/// A set `S` on one side with `|N(S)| < |S|`, certifying that no perfect
/// matching exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallViolator {
    pub side: Side,
    pub set: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

impl HallViolator {
    /// Re-checks the witness against a graph.
    pub fn check(&self, g: &ColoredBipartiteGraph) -> bool {
        if self.neighborhood.len() >= self.set.len() {
            return false;
        }
        let nbrs: std::collections::BTreeSet<usize> = self.neighborhood.iter().copied().collect();
        self.set.iter().all(|&x| {
            let actual = match self.side {
                Side::Left => g.neighbors_of_left(x),
                Side::Right => g.neighbors_of_right(x),
            };
            actual.iter().all(|y| nbrs.contains(y))
        })
    }
}

/// Extracts a Hall violator when `g` has no perfect matching.
pub fn hall_violator(g: &ColoredBipartiteGraph) -> Option<HallViolator> {
    if find_perfect_matching(g).is_some() {
        return None;
    }
    // Work on the side that cannot be fully matched.
    let (side, n_this, neighbors): (Side, usize, Box<dyn Fn(usize) -> Vec<usize>>) =
        if g.n_left() >= g.n_right() {
            (Side::Left, g.n_left(), Box::new(|u| g.neighbors_of_left(u)))
        } else {
            (
                Side::Right,
                g.n_right(),
                Box::new(|v| g.neighbors_of_right(v)),
            )
        };

    // Maximum matching from this side.
    let adj: Vec<Vec<usize>> = (0..n_this).map(neighbors).collect();
    let n_other = match side {
        Side::Left => g.n_right(),
        Side::Right => g.n_left(),
    };
    let mut other_match: Vec<Option<usize>> = vec![None; n_other];

    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        other_match: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &v in &adj[u] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            match other_match[v] {
                None => {
                    other_match[v] = Some(u);
                    return true;
                }
                Some(w) => {
                    if augment(w, adj, other_match, visited) {
                        other_match[v] = Some(u);
                        return true;
                    }
                }
            }
        }
        false
    }

    let mut this_match: Vec<Option<usize>> = vec![None; n_this];
    for u in 0..n_this {
        let mut visited = vec![false; n_other];
        augment(u, &adj, &mut other_match, &mut visited);
    }
    for (v, m) in other_match.iter().enumerate() {
        if let Some(u) = *m {
            this_match[u] = Some(v);
        }
    }
    let free = (0..n_this).find(|&u| this_match[u].is_none())?;

    // Vertices reachable from the free vertex by alternating paths.
    let mut in_set = vec![false; n_this];
    let mut reached_other = vec![false; n_other];
    in_set[free] = true;
    let mut queue = vec![free];
    while let Some(u) = queue.pop() {
        for &v in &adj[u] {
            if reached_other[v] {
                continue;
            }
            reached_other[v] = true;
            if let Some(w) = other_match[v] {
                if !in_set[w] {
                    in_set[w] = true;
                    queue.push(w);
                }
            }
        }
    }
    let set: Vec<usize> = (0..n_this).filter(|&u| in_set[u]).collect();
    let neighborhood: Vec<usize> = (0..n_other).filter(|&v| reached_other[v]).collect();
    debug_assert!(neighborhood.len() < set.len());
    Some(HallViolator {
        side,
        set,
        neighborhood,
    })
}
