//! Vertex labelings, violation sets and the parity identity.
//!
//! A labeling assigns 0/1 to every vertex. A blue edge violates a labeling
//! when its endpoints agree, a red edge when they disagree. The labeling
//! carries a declared red-count target so the even-red variant reuses every
//! code path: a labeling is parity-valid for the odd target when its number
//! of ones has the same parity as `n`, and the opposite parity for the even
//! target.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, ColoredBipartiteGraph, Edge};
use crate::matching::Matching;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum ParityTarget {
    #[serde(rename = "odd")]
    Odd,
    #[serde(rename = "even")]
    Even,
}

impl ParityTarget {
    pub fn matches(self, red_count: usize) -> bool {
        match self {
            ParityTarget::Odd => red_count % 2 == 1,
            ParityTarget::Even => red_count % 2 == 0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ParityTarget::Odd => ParityTarget::Even,
            ParityTarget::Even => ParityTarget::Odd,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelingError {
    #[error("labeling has {left}+{right} bits, graph has {n_left}+{n_right} vertices")]
    SizeMismatch {
        left: usize,
        right: usize,
        n_left: usize,
        n_right: usize,
    },
    #[error("matching is not a perfect matching of the graph")]
    NotPerfect,
    #[error("matching edge ({u},{v},{color:?}) violates the labeling")]
    ViolatingEdge { u: usize, v: usize, color: Color },
    #[error("bad labeling bitstring: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling {
    left: Vec<bool>,
    right: Vec<bool>,
    target: ParityTarget,
}

impl Labeling {
    pub fn new(left: Vec<bool>, right: Vec<bool>, target: ParityTarget) -> Self {
        Labeling {
            left,
            right,
            target,
        }
    }

    pub fn left_bits(&self) -> &[bool] {
        &self.left
    }

    pub fn right_bits(&self) -> &[bool] {
        &self.right
    }

    pub fn target(&self) -> ParityTarget {
        self.target
    }

    pub fn label_left(&self, u: usize) -> bool {
        self.left[u]
    }

    pub fn label_right(&self, v: usize) -> bool {
        self.right[v]
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ones_count(&self) -> usize {
        self.left.iter().filter(|&&b| b).count() + self.right.iter().filter(|&&b| b).count()
    }

    /// Parity validity for the declared target on an n+n vertex set.
    pub fn is_parity_valid(&self) -> bool {
        debug_assert_eq!(self.left.len(), self.right.len());
        let n = self.left.len();
        let same = self.ones_count() % 2 == n % 2;
        match self.target {
            ParityTarget::Odd => same,
            ParityTarget::Even => !same,
        }
    }

    pub fn matches_graph(&self, g: &ColoredBipartiteGraph) -> bool {
        self.left.len() == g.n_left() && self.right.len() == g.n_right()
    }

    /// All labels flipped; the violation set is unchanged by this.
    pub fn flipped(&self) -> Labeling {
        Labeling {
            left: self.left.iter().map(|b| !b).collect(),
            right: self.right.iter().map(|b| !b).collect(),
            target: self.target,
        }
    }

    /// Serializes as `u1..un v1..vn`, e.g. `10 01`.
    pub fn to_bitstring(&self) -> String {
        let side =
            |bits: &[bool]| -> String { bits.iter().map(|&b| if b { '1' } else { '0' }).collect() };
        format!("{} {}", side(&self.left), side(&self.right))
    }

    pub fn parse_bitstring(s: &str, target: ParityTarget) -> Result<Self, LabelingError> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(LabelingError::Parse(format!(
                "expected `<leftbits> <rightbits>`, got `{s}`"
            )));
        }
        let side = |p: &str| -> Result<Vec<bool>, LabelingError> {
            p.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(LabelingError::Parse(format!("bad bit `{other}`"))),
                })
                .collect()
        };
        Ok(Labeling {
            left: side(parts[0])?,
            right: side(parts[1])?,
            target,
        })
    }
}

/// Does `e` violate `l`? Blue edges violate on equal labels, red on unequal.
pub fn edge_violates(e: &Edge, l: &Labeling) -> bool {
    let equal = l.label_left(e.u) == l.label_right(e.v);
    match e.color {
        Color::Blue => equal,
        Color::Red => !equal,
    }
}

/// The violation set of `l`: every edge of `g` that violates it.
/// Accepts parity-invalid labelings; parity is enforced by callers that
/// need it.
pub fn violation_edges(
    g: &ColoredBipartiteGraph,
    l: &Labeling,
) -> Result<Vec<Edge>, LabelingError> {
    if !l.matches_graph(g) {
        return Err(LabelingError::SizeMismatch {
            left: l.left.len(),
            right: l.right.len(),
            n_left: g.n_left(),
            n_right: g.n_right(),
        });
    }
    Ok(g.edges()
        .iter()
        .filter(|e| edge_violates(e, l))
        .copied()
        .collect())
}

/// `|M ∩ E_L|` for a perfect matching of `g`. Rejects non-perfect matchings.
pub fn violation_count(
    g: &ColoredBipartiteGraph,
    m: &Matching,
    l: &Labeling,
) -> Result<usize, LabelingError> {
    if !l.matches_graph(g) {
        return Err(LabelingError::SizeMismatch {
            left: l.left.len(),
            right: l.right.len(),
            n_left: g.n_left(),
            n_right: g.n_right(),
        });
    }
    if !m.is_perfect_on(g) {
        return Err(LabelingError::NotPerfect);
    }
    Ok(m.edges().iter().filter(|e| edge_violates(e, l)).count())
}

/// For a perfect matching fully consistent with `l`, the red-edge count
/// equals `n - |U_1| - |V_1| + 2x` where `x` counts matching edges with both
/// endpoints labeled 1. Returns `(lhs, rhs)`; the two components agree on
/// every accepted input.
pub fn red_parity_identity(
    g: &ColoredBipartiteGraph,
    m: &Matching,
    l: &Labeling,
) -> Result<(usize, usize), LabelingError> {
    if !l.matches_graph(g) {
        return Err(LabelingError::SizeMismatch {
            left: l.left.len(),
            right: l.right.len(),
            n_left: g.n_left(),
            n_right: g.n_right(),
        });
    }
    if !m.is_perfect_on(g) {
        return Err(LabelingError::NotPerfect);
    }
    if let Some(e) = m.edges().iter().find(|e| edge_violates(e, l)) {
        return Err(LabelingError::ViolatingEdge {
            u: e.u,
            v: e.v,
            color: e.color,
        });
    }
    let n = g.n_left() as i64;
    let u1 = l.left.iter().filter(|&&b| b).count() as i64;
    let v1 = l.right.iter().filter(|&&b| b).count() as i64;
    let x = m
        .edges()
        .iter()
        .filter(|e| l.label_left(e.u) && l.label_right(e.v))
        .count() as i64;
    let rhs = n - u1 - v1 + 2 * x;
    debug_assert!(rhs >= 0);
    Ok((m.red_count(), rhs as usize))
}
