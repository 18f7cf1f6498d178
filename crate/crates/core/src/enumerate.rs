//! Brute-force ground truth at desk scale.
//!
//! Everything here is transparent enumeration: recursive left-vertex
//! assignment for matchings and a bit counter for labelings. This module is
//! the trust anchor, so no clever algebra — exceeding a cap is an explicit
//! error, never silent truncation.

use thiserror::Error;

use crate::graph::{ColoredBipartiteGraph, Edge};
use crate::labeling::{Labeling, ParityTarget};
use crate::matching::Matching;

#[derive(Clone, Copy, Debug)]
pub struct EnumCaps {
    /// Largest side size for matching enumeration.
    pub max_matching_n: usize,
    /// Largest total vertex count for labeling enumeration.
    pub max_labeling_vertices: usize,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_matching_n: 8,
            max_labeling_vertices: 24,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("matching enumeration cap exceeded: n = {n}, cap = {cap}")]
    MatchingCap { n: usize, cap: usize },
    #[error("labeling enumeration cap exceeded: {vertices} vertices, cap = {cap}")]
    LabelingCap { vertices: usize, cap: usize },
}

/// Visits every perfect matching of `g` in lexicographic order
/// (permutation first, then colors; red before blue). Returning `false`
/// from the visitor stops the enumeration early.
pub fn visit_perfect_matchings<F: FnMut(&Matching) -> bool>(
    g: &ColoredBipartiteGraph,
    caps: &EnumCaps,
    mut visit: F,
) -> Result<(), EnumError> {
    let n = g.n_left().max(g.n_right());
    if n > caps.max_matching_n {
        return Err(EnumError::MatchingCap {
            n,
            cap: caps.max_matching_n,
        });
    }
    if g.n_left() != g.n_right() {
        return Ok(());
    }
    let n = g.n_left();
    let mut used_right = vec![false; n];
    let mut chosen: Vec<Edge> = Vec::with_capacity(n);

    fn rec<F: FnMut(&Matching) -> bool>(
        g: &ColoredBipartiteGraph,
        u: usize,
        used_right: &mut [bool],
        chosen: &mut Vec<Edge>,
        visit: &mut F,
    ) -> bool {
        let n = g.n_left();
        if u == n {
            let m = Matching::new(chosen.clone()).expect("construction keeps edges disjoint");
            return visit(&m);
        }
        for &idx in g.incident(crate::graph::Side::Left, u) {
            let e = g.edges()[idx];
            if used_right[e.v] {
                continue;
            }
            used_right[e.v] = true;
            chosen.push(e);
            let keep_going = rec(g, u + 1, used_right, chosen, visit);
            chosen.pop();
            used_right[e.v] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }

    rec(g, 0, &mut used_right, &mut chosen, &mut visit);
    Ok(())
}

/// All perfect matchings, lexicographically ordered, no duplicates.
pub fn enumerate_perfect_matchings(
    g: &ColoredBipartiteGraph,
    caps: &EnumCaps,
) -> Result<Vec<Matching>, EnumError> {
    let mut out = Vec::new();
    visit_perfect_matchings(g, caps, |m| {
        out.push(m.clone());
        true
    })?;
    Ok(out)
}

/// All perfect matchings with exactly `k` red edges.
pub fn enumerate_exact_red(
    g: &ColoredBipartiteGraph,
    k: usize,
    caps: &EnumCaps,
) -> Result<Vec<Matching>, EnumError> {
    let mut out = Vec::new();
    visit_perfect_matchings(g, caps, |m| {
        if m.red_count() == k {
            out.push(m.clone());
        }
        true
    })?;
    Ok(out)
}

/// All labelings of an n+n vertex set in the requested parity class,
/// in ascending bit-counter order (left bits are the low positions).
pub fn enumerate_labelings(
    n: usize,
    target: ParityTarget,
    caps: &EnumCaps,
) -> Result<Vec<Labeling>, EnumError> {
    let vertices = 2 * n;
    if vertices > caps.max_labeling_vertices {
        return Err(EnumError::LabelingCap {
            vertices,
            cap: caps.max_labeling_vertices,
        });
    }
    let mut out = Vec::with_capacity(1usize << (vertices - 1));
    for bits in 0u32..(1u32 << vertices) {
        let ones = bits.count_ones() as usize;
        let same = ones % 2 == n % 2;
        let valid = match target {
            ParityTarget::Odd => same,
            ParityTarget::Even => !same,
        };
        if !valid {
            continue;
        }
        let left: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let right: Vec<bool> = (0..n).map(|j| bits >> (n + j) & 1 == 1).collect();
        out.push(Labeling::new(left, right, target));
    }
    Ok(out)
}

/// True iff some perfect matching has the target red parity.
pub fn brute_force_parity_decision(
    g: &ColoredBipartiteGraph,
    target: ParityTarget,
    caps: &EnumCaps,
) -> Result<bool, EnumError> {
    let mut found = false;
    visit_perfect_matchings(g, caps, |m| {
        if target.matches(m.red_count()) {
            found = true;
            false
        } else {
            true
        }
    })?;
    Ok(found)
}
