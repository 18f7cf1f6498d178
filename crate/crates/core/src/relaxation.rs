//! The labeling-constraint relaxation as an exact-rational LP.
//!
//! Variables: one per edge. Rows: degree equalities (`sum = 1` per vertex),
//! one `sum over E_L >= 1` inequality per parity-valid labeling, and
//! nonnegativity. Feasibility is decided with the exact simplex; rows are
//! activated lazily (a witness is re-checked against every row, and an
//! infeasible subset certifies infeasibility of the whole system), which
//! keeps exhaustive sweeps fast without giving up exactness.

use thiserror::Error;

use crate::enumerate::{enumerate_labelings, EnumCaps, EnumError};
use crate::graph::{ColoredBipartiteGraph, Side};
use crate::labeling::{edge_violates, Labeling, ParityTarget};
use crate::rat::Rat;
use crate::simplex::{feasible_point, LpProblem, LpRow, RowOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelaxError {
    #[error("relaxation requires a square graph, got {n_left}x{n_right}")]
    NotSquare { n_left: usize, n_right: usize },
    #[error(transparent)]
    Enum(#[from] EnumError),
}

#[derive(Clone, Debug)]
pub struct LabelingRow {
    pub labeling: Labeling,
    /// Indices into `graph.edges()` of the violation set.
    pub support: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RelaxationLP {
    pub graph: ColoredBipartiteGraph,
    pub target: ParityTarget,
    /// Degree rows `(side, vertex, incident edge indices)`.
    pub degree_rows: Vec<(Side, usize, Vec<usize>)>,
    pub labeling_rows: Vec<LabelingRow>,
}

/// Builds the full relaxation: degree equalities plus one inequality per
/// parity-valid labeling.
pub fn build_relaxation(
    g: &ColoredBipartiteGraph,
    target: ParityTarget,
    caps: &EnumCaps,
) -> Result<RelaxationLP, RelaxError> {
    let n = g.square_n().ok_or(RelaxError::NotSquare {
        n_left: g.n_left(),
        n_right: g.n_right(),
    })?;
    let mut degree_rows = Vec::with_capacity(2 * n);
    for u in 0..n {
        degree_rows.push((Side::Left, u, g.incident(Side::Left, u).to_vec()));
    }
    for v in 0..n {
        degree_rows.push((Side::Right, v, g.incident(Side::Right, v).to_vec()));
    }
    let labeling_rows = enumerate_labelings(n, target, caps)?
        .into_iter()
        .map(|labeling| {
            let support = g
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| edge_violates(e, &labeling))
                .map(|(i, _)| i)
                .collect();
            LabelingRow { labeling, support }
        })
        .collect();
    Ok(RelaxationLP {
        graph: g.clone(),
        target,
        degree_rows,
        labeling_rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    Feasible { witness: Vec<Rat> },
    Infeasible,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible { .. })
    }
}

/// Word-packed edge subset, wide enough for any enumerable instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeSet {
    words: Vec<u64>,
}

impl EdgeSet {
    fn from_indices(indices: &[usize], num_edges: usize) -> EdgeSet {
        let mut words = vec![0u64; num_edges.div_ceil(64)];
        for &i in indices {
            words[i / 64] |= 1 << (i % 64);
        }
        EdgeSet { words }
    }
}

/// Exact feasibility of the relaxation, with a rational witness point when
/// feasible.
pub fn lp_feasible(lp: &RelaxationLP) -> FeasibilityVerdict {
    let num_edges = lp.graph.edges().len();

    // A vertex with no incident edge, or a labeling whose violation set
    // misses the graph entirely, is immediately infeasible.
    if lp.degree_rows.iter().any(|(_, _, sup)| sup.is_empty()) {
        return FeasibilityVerdict::Infeasible;
    }
    if lp.labeling_rows.iter().any(|r| r.support.is_empty()) {
        return FeasibilityVerdict::Infeasible;
    }

    // Dedupe identical supports (complement labelings share a violation
    // set). Duplicates would only be rescanned, never re-added, but half
    // the scan is half the scan.
    let mut seen: std::collections::BTreeSet<EdgeSet> = std::collections::BTreeSet::new();
    let mut candidates: Vec<usize> = Vec::new();
    for (i, row) in lp.labeling_rows.iter().enumerate() {
        if seen.insert(EdgeSet::from_indices(&row.support, num_edges)) {
            candidates.push(i);
        }
    }

    let degree_lp_rows: Vec<LpRow> = lp
        .degree_rows
        .iter()
        .map(|(_, _, sup)| LpRow {
            coeffs: sup.iter().map(|&e| (e, Rat::one())).collect(),
            op: RowOp::Eq,
            rhs: Rat::one(),
        })
        .collect();

    let labeling_lp_row = |idx: usize| LpRow {
        coeffs: lp.labeling_rows[idx]
            .support
            .iter()
            .map(|&e| (e, Rat::one()))
            .collect(),
        op: RowOp::Ge,
        rhs: Rat::one(),
    };

    let mut active: Vec<usize> = Vec::new();
    loop {
        let mut rows = degree_lp_rows.clone();
        rows.extend(active.iter().map(|&i| labeling_lp_row(i)));
        let problem = LpProblem {
            num_vars: num_edges,
            rows,
        };
        let Some(witness) = feasible_point(&problem) else {
            // Infeasible subsystem certifies the full system.
            return FeasibilityVerdict::Infeasible;
        };

        // Most violated candidate row, lowest index on ties.
        let mut worst: Option<(Rat, usize)> = None;
        for &i in &candidates {
            let total = lp.labeling_rows[i]
                .support
                .iter()
                .fold(Rat::zero(), |acc, &e| &acc + &witness[e]);
            if total < Rat::one() {
                let key = (total, i);
                worst = match worst {
                    None => Some(key),
                    Some(cur) => {
                        if key < cur {
                            Some(key)
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
        }
        match worst {
            Some((_, i)) => {
                debug_assert!(!active.contains(&i));
                active.push(i);
            }
            None => {
                debug_assert!(verify_witness(lp, &witness).is_ok());
                return FeasibilityVerdict::Feasible { witness };
            }
        }
    }
}

/// Exact check of a point against every row of the relaxation.
pub fn verify_witness(lp: &RelaxationLP, witness: &[Rat]) -> Result<(), String> {
    if witness.len() != lp.graph.edges().len() {
        return Err("witness length mismatch".into());
    }
    if witness.iter().any(|x| x.is_negative()) {
        return Err("negative coordinate".into());
    }
    for (side, idx, sup) in &lp.degree_rows {
        let total = sup.iter().fold(Rat::zero(), |acc, &e| &acc + &witness[e]);
        if total != Rat::one() {
            return Err(format!("degree row {side:?} {idx} sums to {total}"));
        }
    }
    for (i, row) in lp.labeling_rows.iter().enumerate() {
        let total = row
            .support
            .iter()
            .fold(Rat::zero(), |acc, &e| &acc + &witness[e]);
        if total < Rat::one() {
            return Err(format!("labeling row {i} sums to {total}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::brute_force_parity_decision;
    use crate::graph::{Color, Edge};

    fn fig1_style() -> ColoredBipartiteGraph {
        ColoredBipartiteGraph::new(
            2,
            2,
            vec![
                Edge::new(0, 1, Color::Red),
                Edge::new(1, 0, Color::Red),
                Edge::new(0, 0, Color::Blue),
                Edge::new(1, 1, Color::Blue),
            ],
        )
        .unwrap()
    }

    #[test]
    fn relaxation_shape() {
        let caps = EnumCaps::default();
        let g1 = ColoredBipartiteGraph::complete_double(1).unwrap();
        let lp = build_relaxation(&g1, ParityTarget::Odd, &caps).unwrap();
        assert_eq!(lp.graph.edges().len(), 2);
        assert_eq!(lp.degree_rows.len(), 2);
        assert_eq!(lp.labeling_rows.len(), 2);

        let g2 = ColoredBipartiteGraph::complete_double(2).unwrap();
        let lp = build_relaxation(&g2, ParityTarget::Odd, &caps).unwrap();
        assert_eq!(lp.graph.edges().len(), 8);
        assert_eq!(lp.degree_rows.len(), 4);
        assert_eq!(lp.labeling_rows.len(), 8);

        let lp = build_relaxation(&fig1_style(), ParityTarget::Odd, &caps).unwrap();
        assert_eq!(lp.graph.edges().len(), 4);
        assert_eq!(lp.degree_rows.len(), 4);
        assert_eq!(lp.labeling_rows.len(), 8);

        // Row supports match the violation sets.
        for row in &lp.labeling_rows {
            for (i, e) in lp.graph.edges().iter().enumerate() {
                assert_eq!(row.support.contains(&i), edge_violates(e, &row.labeling));
            }
        }
    }

    #[test]
    fn n1_witness_is_the_red_edge() {
        let caps = EnumCaps::default();
        let g = ColoredBipartiteGraph::complete_double(1).unwrap();
        let lp = build_relaxation(&g, ParityTarget::Odd, &caps).unwrap();
        match lp_feasible(&lp) {
            FeasibilityVerdict::Feasible { witness } => {
                // Edge order is (red, blue) after canonical sorting.
                assert_eq!(g.edges()[0].color, Color::Red);
                assert_eq!(witness, vec![Rat::one(), Rat::zero()]);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn fig1_is_infeasible_for_odd() {
        let caps = EnumCaps::default();
        let lp = build_relaxation(&fig1_style(), ParityTarget::Odd, &caps).unwrap();
        assert_eq!(lp_feasible(&lp), FeasibilityVerdict::Infeasible);
        let lp = build_relaxation(&fig1_style(), ParityTarget::Even, &caps).unwrap();
        assert!(lp_feasible(&lp).is_feasible());
    }

    #[test]
    fn complete_double_n3_feasible() {
        let caps = EnumCaps::default();
        let g = ColoredBipartiteGraph::complete_double(3).unwrap();
        let lp = build_relaxation(&g, ParityTarget::Odd, &caps).unwrap();
        match lp_feasible(&lp) {
            FeasibilityVerdict::Feasible { witness } => {
                verify_witness(&lp, &witness).unwrap();
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn agrees_with_oracle_on_random_graphs() {
        let caps = EnumCaps::default();
        let mut rng = crate::seeding::rng_from(21);
        for _ in 0..120 {
            let n = 1 + rand::Rng::random_range(&mut rng, 0..3usize);
            let g = crate::corpus::random_square_graph(n, 0.5, 0.5, &mut rng);
            for target in [ParityTarget::Odd, ParityTarget::Even] {
                let lp = build_relaxation(&g, target, &caps).unwrap();
                let verdict = lp_feasible(&lp);
                let oracle = brute_force_parity_decision(&g, target, &caps).unwrap();
                assert_eq!(verdict.is_feasible(), oracle, "graph {}", g.to_text());
                if let FeasibilityVerdict::Feasible { witness } = verdict {
                    verify_witness(&lp, &witness).unwrap();
                }
            }
        }
    }

    #[test]
    fn non_square_rejected() {
        let g = ColoredBipartiteGraph::new(1, 2, vec![Edge::new(0, 0, Color::Red)]).unwrap();
        assert!(matches!(
            build_relaxation(&g, ParityTarget::Odd, &EnumCaps::default()),
            Err(RelaxError::NotSquare { .. })
        ));
    }
}
