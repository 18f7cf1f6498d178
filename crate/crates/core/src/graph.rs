//! Two-colored bipartite (multi)graphs and their text format.
//!
//! Vertices are 0-based internally; the `.cbg` text format is 1-based.
//! Parallel red/blue edges between the same pair are first-class; a simple
//! graph is just the special case with at most one color per pair.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "B")]
    Blue,
}

impl Color {
    pub fn letter(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    Left,
    Right,
}

/// An edge `(u, v, color)` with `u` on the left side and `v` on the right.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub color: Color,
}

impl Edge {
    pub fn new(u: usize, v: usize, color: Color) -> Self {
        Edge { u, v, color }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex count must be positive")]
    EmptySide,
    #[error("edge ({u},{v}) out of range for {n_left}x{n_right} graph")]
    EdgeOutOfRange {
        u: usize,
        v: usize,
        n_left: usize,
        n_right: usize,
    },
    #[error("duplicate edge ({u},{v},{color:?})")]
    DuplicateEdge { u: usize, v: usize, color: Color },
    #[error("bad graph file: {0}")]
    Parse(String),
}

/// A bipartite graph whose edges carry a red/blue color. Immutable after
/// construction; edges are kept sorted so everything downstream is
/// deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredBipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<Edge>,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
    is_complete_double: bool,
}

impl ColoredBipartiteGraph {
    pub fn new(n_left: usize, n_right: usize, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        if n_left == 0 || n_right == 0 {
            return Err(GraphError::EmptySide);
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge {
                    u: w[0].u,
                    v: w[0].v,
                    color: w[0].color,
                });
            }
        }
        for e in &edges {
            if e.u >= n_left || e.v >= n_right {
                return Err(GraphError::EdgeOutOfRange {
                    u: e.u,
                    v: e.v,
                    n_left,
                    n_right,
                });
            }
        }
        let mut left_adj = vec![Vec::new(); n_left];
        let mut right_adj = vec![Vec::new(); n_right];
        for (idx, e) in edges.iter().enumerate() {
            left_adj[e.u].push(idx);
            right_adj[e.v].push(idx);
        }
        let is_complete_double = n_left == n_right
            && edges.len() == 2 * n_left * n_left
            && edges
                .iter()
                .zip(Self::complete_double_edges(n_left))
                .all(|(a, b)| *a == b);
        Ok(ColoredBipartiteGraph {
            n_left,
            n_right,
            edges,
            left_adj,
            right_adj,
            is_complete_double,
        })
    }

    fn complete_double_edges(n: usize) -> impl Iterator<Item = Edge> {
        (0..n).flat_map(move |u| {
            (0..n).flat_map(move |v| {
                [Edge::new(u, v, Color::Red), Edge::new(u, v, Color::Blue)].into_iter()
            })
        })
    }

    /// The canonical instance: one red and one blue edge between every pair.
    pub fn complete_double(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptySide);
        }
        let g = Self::new(n, n, Self::complete_double_edges(n).collect())?;
        debug_assert!(g.is_complete_double);
        Ok(g)
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    /// Number of vertex pairs when the graph is square.
    pub fn square_n(&self) -> Option<usize> {
        (self.n_left == self.n_right).then_some(self.n_left)
    }

    pub fn num_vertices(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_complete_double(&self) -> bool {
        self.is_complete_double
    }

    pub fn has_edge(&self, u: usize, v: usize, color: Color) -> bool {
        self.edges.binary_search(&Edge::new(u, v, color)).is_ok()
    }

    pub fn edge_index(&self, e: &Edge) -> Option<usize> {
        self.edges.binary_search(e).ok()
    }

    /// Indices into `edges()` incident to the given vertex.
    pub fn incident(&self, side: Side, idx: usize) -> &[usize] {
        match side {
            Side::Left => &self.left_adj[idx],
            Side::Right => &self.right_adj[idx],
        }
    }

    /// Right neighbours of a left vertex, ignoring colors, deduped, ascending.
    pub fn neighbors_of_left(&self, u: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.left_adj[u].iter().map(|&i| self.edges[i].v).collect();
        vs.dedup();
        vs
    }

    pub fn neighbors_of_right(&self, v: usize) -> Vec<usize> {
        let mut us: Vec<usize> = self.right_adj[v].iter().map(|&i| self.edges[i].u).collect();
        us.sort_unstable();
        us.dedup();
        us
    }

    /// Parses the `.cbg` text format:
    /// `p cbg <n_left> <n_right> <m>` header, then `m` lines `e <u> <v> <R|B>`
    /// with 1-based vertex ids. Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("p") => {
                    if header.is_some() {
                        return Err(GraphError::Parse(format!(
                            "line {}: duplicate header",
                            lineno + 1
                        )));
                    }
                    let kind = it.next().unwrap_or("");
                    if kind != "cbg" {
                        return Err(GraphError::Parse(format!(
                            "line {}: expected `p cbg`, got `p {kind}`",
                            lineno + 1
                        )));
                    }
                    let nums: Vec<usize> = it
                        .map(|t| {
                            t.parse().map_err(|_| {
                                GraphError::Parse(format!("line {}: bad number `{t}`", lineno + 1))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    if nums.len() != 3 {
                        return Err(GraphError::Parse(format!(
                            "line {}: header needs n_left n_right m",
                            lineno + 1
                        )));
                    }
                    header = Some((nums[0], nums[1], nums[2]));
                }
                Some("e") => {
                    let toks: Vec<&str> = it.collect();
                    if toks.len() != 3 {
                        return Err(GraphError::Parse(format!(
                            "line {}: edge needs `e u v R|B`",
                            lineno + 1
                        )));
                    }
                    let u: usize = toks[0].parse().map_err(|_| {
                        GraphError::Parse(format!("line {}: bad vertex `{}`", lineno + 1, toks[0]))
                    })?;
                    let v: usize = toks[1].parse().map_err(|_| {
                        GraphError::Parse(format!("line {}: bad vertex `{}`", lineno + 1, toks[1]))
                    })?;
                    if u == 0 || v == 0 {
                        return Err(GraphError::Parse(format!(
                            "line {}: vertex ids are 1-based",
                            lineno + 1
                        )));
                    }
                    let color = match toks[2] {
                        "R" | "r" => Color::Red,
                        "B" | "b" => Color::Blue,
                        other => {
                            return Err(GraphError::Parse(format!(
                                "line {}: bad color `{other}`",
                                lineno + 1
                            )))
                        }
                    };
                    edges.push(Edge::new(u - 1, v - 1, color));
                }
                Some(other) => {
                    return Err(GraphError::Parse(format!(
                        "line {}: unknown record `{other}`",
                        lineno + 1
                    )))
                }
                None => {}
            }
        }
        let (n_left, n_right, m) =
            header.ok_or_else(|| GraphError::Parse("missing `p cbg` header".into()))?;
        if edges.len() != m {
            return Err(GraphError::Parse(format!(
                "header declares {m} edges, found {}",
                edges.len()
            )));
        }
        Self::new(n_left, n_right, edges)
    }

    /// Serializes to the `.cbg` text format (1-based ids).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "p cbg {} {} {}",
            self.n_left,
            self.n_right,
            self.edges.len()
        );
        for e in &self.edges {
            let _ = writeln!(out, "e {} {} {}", e.u + 1, e.v + 1, e.color.letter());
        }
        out
    }
}
