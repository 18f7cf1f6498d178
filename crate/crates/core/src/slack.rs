//! Slack matrices of the relaxation: rows are target-parity perfect
//! matchings, columns are parity-valid labelings, and each entry is the
//! violation count minus one. Entries are always even integers in
//! `[0, n-1]`. Degree-constraint columns have identically zero slack and
//! are excluded unless explicitly requested.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{enumerate_labelings, enumerate_perfect_matchings, EnumCaps, EnumError};
use crate::graph::{Color, ColoredBipartiteGraph, Edge};
use crate::labeling::{edge_violates, Labeling, ParityTarget};
use crate::matching::Matching;
use crate::rat::Rat;

#[derive(Debug, Error)]
pub enum SlackError {
    #[error("slack matrix requires a square graph")]
    NotSquare,
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad slack csv: {0}")]
    Parse(String),
}

#[derive(Clone, Debug)]
pub struct SlackMatrix {
    pub n: usize,
    pub target: ParityTarget,
    pub rows: Vec<Matching>,
    pub cols: Vec<Labeling>,
    /// Number of leading all-zero degree columns (0 or 2n).
    pub degree_cols: usize,
    pub entries: Vec<Vec<Rat>>,
}

impl SlackMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.degree_cols + self.cols.len()
    }

    /// The labeling-column block of the entry matrix.
    pub fn labeling_entries(&self) -> Vec<Vec<Rat>> {
        self.entries
            .iter()
            .map(|row| row[self.degree_cols..].to_vec())
            .collect()
    }
}

/// Builds the slack matrix of `g` for the given red-parity target. Row and
/// column orderings are the canonical enumeration orders, so matrices are
/// byte-stable across runs.
pub fn build_slack_matrix(
    g: &ColoredBipartiteGraph,
    target: ParityTarget,
    include_degree_cols: bool,
    caps: &EnumCaps,
) -> Result<SlackMatrix, SlackError> {
    let n = g.square_n().ok_or(SlackError::NotSquare)?;
    let rows: Vec<Matching> = enumerate_perfect_matchings(g, caps)?
        .into_iter()
        .filter(|m| target.matches(m.red_count()))
        .collect();
    let cols = enumerate_labelings(n, target, caps)?;
    let degree_cols = if include_degree_cols { 2 * n } else { 0 };

    let entries: Vec<Vec<Rat>> = rows
        .par_iter()
        .map(|m| {
            let mut row: Vec<Rat> = Vec::with_capacity(degree_cols + cols.len());
            row.resize(degree_cols, Rat::zero());
            for l in &cols {
                let violations = m.edges().iter().filter(|e| edge_violates(e, l)).count();
                debug_assert!(violations >= 1 && violations % 2 == 1);
                row.push(Rat::from_int(violations as i64 - 1));
            }
            row
        })
        .collect();

    Ok(SlackMatrix {
        n,
        target,
        rows,
        cols,
        degree_cols,
        entries,
    })
}

/// CSV layout: header `slack,<col ids...>`, then one line per matching row.
pub fn write_csv<W: Write>(s: &SlackMatrix, out: &mut W) -> Result<(), SlackError> {
    let mut header = vec!["slack".to_string()];
    for d in 0..s.degree_cols {
        header.push(format!("D{d}"));
    }
    for j in 0..s.cols.len() {
        header.push(format!("L{j}"));
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, row) in s.entries.iter().enumerate() {
        let mut line = vec![format!("M{i}")];
        line.extend(row.iter().map(|x| x.to_string()));
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlackSidecar {
    pub schema_version: u32,
    pub n: usize,
    pub target: ParityTarget,
    pub degree_cols: usize,
    pub rows: Vec<SlackRowMeta>,
    pub cols: Vec<SlackColMeta>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlackRowMeta {
    pub id: String,
    /// Edges as 1-based `[u, v, color]` triples.
    pub edges: Vec<(usize, usize, Color)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlackColMeta {
    pub id: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<String>,
}

/// JSON sidecar mapping row/column indices to the objects they index.
pub fn sidecar(s: &SlackMatrix) -> SlackSidecar {
    let rows = s
        .entries
        .iter()
        .enumerate()
        .map(|(i, _)| SlackRowMeta {
            id: format!("M{i}"),
            edges: s.rows[i]
                .edges()
                .iter()
                .map(|e| (e.u + 1, e.v + 1, e.color))
                .collect(),
        })
        .collect();
    let mut cols: Vec<SlackColMeta> = (0..s.degree_cols)
        .map(|d| SlackColMeta {
            id: format!("D{d}"),
            kind: "degree".into(),
            bits: None,
        })
        .collect();
    cols.extend(s.cols.iter().enumerate().map(|(j, l)| SlackColMeta {
        id: format!("L{j}"),
        kind: "labeling".into(),
        bits: Some(l.to_bitstring()),
    }));
    SlackSidecar {
        schema_version: 1,
        n: s.n,
        target: s.target,
        degree_cols: s.degree_cols,
        rows,
        cols,
    }
}

/// Reads a matrix in the CSV layout written by `write_csv`. Returns the
/// entries plus the row/column ids; any rational entries are accepted.
pub fn read_csv<R: BufRead>(
    input: R,
) -> Result<(Vec<Vec<Rat>>, Vec<String>, Vec<String>), SlackError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| SlackError::Parse("empty file".into()))??;
    let mut cols: Vec<String> = header.split(',').map(|t| t.trim().to_string()).collect();
    if cols.is_empty() || cols[0] != "slack" {
        return Err(SlackError::Parse("header must start with `slack`".into()));
    }
    cols.remove(0);
    let mut row_ids = Vec::new();
    let mut entries = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split(',');
        let id = toks
            .next()
            .ok_or_else(|| SlackError::Parse("missing row id".into()))?
            .trim()
            .to_string();
        let row: Vec<Rat> = toks
            .map(|t| {
                t.trim()
                    .parse::<Rat>()
                    .map_err(|e| SlackError::Parse(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != cols.len() {
            return Err(SlackError::Parse(format!(
                "row {id} has {} entries, expected {}",
                row.len(),
                cols.len()
            )));
        }
        row_ids.push(id);
        entries.push(row);
    }
    Ok((entries, row_ids, cols))
}

/// Reconstructs edges from sidecar metadata (1-based triples).
pub fn edges_from_meta(meta: &SlackRowMeta) -> Vec<Edge> {
    meta.edges
        .iter()
        .map(|&(u, v, color)| Edge::new(u - 1, v - 1, color))
        .collect()
}
