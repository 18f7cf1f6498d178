//! Nonnegative-rank bounding machinery.
//!
//! The hyperplane separation bound `<W,S> / (||S||_inf * max_R <W,R>)` is a
//! lower bound on the nonnegative rank of `S` for any weight matrix `W` with
//! a positive entry, where the max ranges over combinatorial rectangles.
//! Weight entries may be *forbidden* (conceptually minus infinity): any
//! rectangle touching a forbidden entry is excluded from the max, and the
//! inner product uses the convention forbidden-times-zero = 0, which is why
//! forbidden entries are only allowed where the slack entry is zero.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::Rat;
use crate::seeding::{child_seed, rng_from};
use crate::simplex::{minimize, LpOutcome, LpProblem, LpRow, RowOp};
use crate::slack::SlackMatrix;

pub const EXHAUSTIVE_SIDE_CAP: usize = 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("dimension mismatch between slack and weight matrices")]
    DimensionMismatch,
    #[error("weight matrix has no positive finite entry")]
    NoPositiveEntry,
    #[error("forbidden weight at ({0},{1}) where slack is nonzero")]
    ForbiddenOnNonzero(usize, usize),
    #[error("slack entry at ({0},{1}) is negative")]
    NegativeSlackEntry(usize, usize),
    #[error("slack matrix is identically zero")]
    DegenerateSlack,
    #[error("max rectangle value is not positive; bound undefined")]
    UndefinedBound,
    #[error("matrix support is empty")]
    EmptySupport,
    #[error("exhaustive search needs min side <= {cap}, got {side}")]
    CapExceeded { side: usize, cap: usize },
    #[error("missing distribution weight for the {count}-violation entry at ({row},{col})")]
    MissingDistribution {
        row: usize,
        col: usize,
        count: usize,
    },
    #[error("slack entry at ({0},{1}) is not a nonnegative integer")]
    NonIntegerSlack(usize, usize),
    #[error("weight parameter k must be at least 1")]
    BadK,
}

/// A finite rational weight or the distinguished forbidden value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum WeightEntry {
    Forbidden,
    Finite(Rat),
}

impl WeightEntry {
    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            WeightEntry::Forbidden => None,
            WeightEntry::Finite(x) => Some(x),
        }
    }
}

impl Serialize for WeightEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            WeightEntry::Forbidden => s.serialize_str("-inf"),
            WeightEntry::Finite(x) => s.serialize_str(&x.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for WeightEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim() == "-inf" {
            return Ok(WeightEntry::Forbidden);
        }
        s.parse::<Rat>()
            .map(WeightEntry::Finite)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub entries: Vec<Vec<WeightEntry>>,
}

impl WeightMatrix {
    pub fn finite(entries: Vec<Vec<Rat>>) -> WeightMatrix {
        WeightMatrix {
            entries: entries
                .into_iter()
                .map(|row| row.into_iter().map(WeightEntry::Finite).collect())
                .collect(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.entries.len()
    }

    pub fn num_cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn has_positive_entry(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .any(|e| e.as_finite().is_some_and(|x| x.is_positive()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rectangle {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub enum RectangleMode {
    Exhaustive,
    LocalSearch { restarts: usize, seed: u64 },
}

/// Value of `<W, R>` for a rectangle, or `None` if it touches a forbidden
/// entry.
pub fn rectangle_value(w: &WeightMatrix, rect: &Rectangle) -> Option<Rat> {
    let mut total = Rat::zero();
    for &i in &rect.rows {
        for &j in &rect.cols {
            total = &total + w.entries[i][j].as_finite()?;
        }
    }
    Some(total)
}

/// Duplicate-line reduction. Given any column set, each row contributes to
/// a rectangle's value independently (and vice versa), so an optimal
/// rectangle can be taken closed under duplicate rows and columns: the
/// search runs on distinct line patterns carrying their multiplicity.
struct Reduced {
    /// Distinct enumerated-side lines x distinct opposite lines.
    entries: Vec<Vec<WeightEntry>>,
    /// Original indices per enumerated-side class.
    side_members: Vec<Vec<usize>>,
    /// Original indices per opposite-side class.
    opp_members: Vec<Vec<usize>>,
    rows_enumerated: bool,
}

fn reduce(w: &WeightMatrix) -> Reduced {
    let dedupe = |lines: Vec<Vec<WeightEntry>>| -> (Vec<Vec<WeightEntry>>, Vec<Vec<usize>>) {
        let mut classes: Vec<Vec<WeightEntry>> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut index: BTreeMap<Vec<WeightEntry>, usize> = BTreeMap::new();
        for (i, line) in lines.into_iter().enumerate() {
            match index.get(&line) {
                Some(&c) => members[c].push(i),
                None => {
                    index.insert(line.clone(), classes.len());
                    members.push(vec![i]);
                    classes.push(line);
                }
            }
        }
        (classes, members)
    };
    let rows: Vec<Vec<WeightEntry>> = w.entries.clone();
    let cols: Vec<Vec<WeightEntry>> = (0..w.num_cols())
        .map(|j| w.entries.iter().map(|row| row[j].clone()).collect())
        .collect();
    let (row_classes, row_members) = dedupe(rows);
    let (col_classes, col_members) = dedupe(cols);
    // Enumerate the side with fewer distinct lines.
    if row_classes.len() <= col_classes.len() {
        // Reduced entry (r, c): the value of class-r rows in any column of
        // class c.
        let entries = row_members
            .iter()
            .map(|m| {
                col_members
                    .iter()
                    .map(|cm| w.entries[m[0]][cm[0]].clone())
                    .collect()
            })
            .collect();
        Reduced {
            entries,
            side_members: row_members,
            opp_members: col_members,
            rows_enumerated: true,
        }
    } else {
        let entries = col_members
            .iter()
            .map(|cm| {
                row_members
                    .iter()
                    .map(|m| w.entries[m[0]][cm[0]].clone())
                    .collect()
            })
            .collect();
        Reduced {
            entries,
            side_members: col_members,
            opp_members: row_members,
            rows_enumerated: false,
        }
    }
}

impl Reduced {
    fn side(&self) -> usize {
        self.side_members.len()
    }

    fn opposite(&self) -> usize {
        self.opp_members.len()
    }

    /// Rectangle and value for a subset mask of the enumerated classes: the
    /// opposite side takes every class with a strictly positive finite
    /// partial sum (all its copies).
    fn materialize(&self, mask: u64, partials: &[(Rat, u32)]) -> (Rat, Rectangle) {
        let mut side_set: Vec<usize> = Vec::new();
        for (s, members) in self.side_members.iter().enumerate() {
            if mask >> s & 1 == 1 {
                side_set.extend_from_slice(members);
            }
        }
        side_set.sort_unstable();
        let mut opp_set = Vec::new();
        let mut value = Rat::zero();
        if !side_set.is_empty() {
            for (opp, (sum, forbidden)) in partials.iter().enumerate() {
                if *forbidden == 0 && sum.is_positive() {
                    opp_set.extend_from_slice(&self.opp_members[opp]);
                    value = &value + &(sum * &Rat::from_int(self.opp_members[opp].len() as i64));
                }
            }
            opp_set.sort_unstable();
        }
        if opp_set.is_empty() {
            side_set.clear();
            value = Rat::zero();
        }
        let rect = if self.rows_enumerated {
            Rectangle {
                rows: side_set,
                cols: opp_set,
            }
        } else {
            Rectangle {
                rows: opp_set,
                cols: side_set,
            }
        };
        (value, rect)
    }

    /// Adds or removes one enumerated class from the running partials. The
    /// class multiplicity scales its contribution.
    fn apply(&self, partials: &mut [(Rat, u32)], class: usize, added: bool) {
        let mult = self.side_members[class].len() as u32;
        for (opp, p) in partials.iter_mut().enumerate() {
            match &self.entries[class][opp] {
                WeightEntry::Forbidden => {
                    if added {
                        p.1 += mult;
                    } else {
                        p.1 -= mult;
                    }
                }
                WeightEntry::Finite(x) => {
                    let delta = x * &Rat::from_int(mult as i64);
                    if added {
                        p.0 = &p.0 + &delta;
                    } else {
                        p.0 = &p.0 - &delta;
                    }
                }
            }
        }
    }
}

fn better(best: &(Rat, Rectangle), cand: &(Rat, Rectangle)) -> bool {
    match cand.0.cmp(&best.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (&cand.1.rows, &cand.1.cols) < (&best.1.rows, &best.1.cols),
    }
}

/// Maximum rectangle value of a weight matrix.
///
/// Exhaustive mode iterates all subsets of the smaller side's distinct
/// lines (Gray-code order, deterministic lexicographic tie-break) and
/// derives the optimal complementary side per subset; it is exact. Local
/// search runs seeded 1-swap hill climbing and returns a value no larger
/// than the optimum.
pub fn max_rectangle_value(
    w: &WeightMatrix,
    mode: RectangleMode,
) -> Result<(Rat, Rectangle), BoundsError> {
    let reduced = reduce(w);
    let side = reduced.side();
    match mode {
        RectangleMode::Exhaustive => {
            if side > EXHAUSTIVE_SIDE_CAP {
                return Err(BoundsError::CapExceeded {
                    side,
                    cap: EXHAUSTIVE_SIDE_CAP,
                });
            }
            let mut partials: Vec<(Rat, u32)> = vec![(Rat::zero(), 0); reduced.opposite()];
            let mut best = (Rat::zero(), Rectangle::default());
            for step in 1u64..(1u64 << side) {
                let bit = step.trailing_zeros() as usize;
                let gray = step ^ (step >> 1);
                let added = gray >> bit & 1 == 1;
                reduced.apply(&mut partials, bit, added);
                let cand = reduced.materialize(gray, &partials);
                if better(&best, &cand) {
                    best = cand;
                }
            }
            Ok(best)
        }
        RectangleMode::LocalSearch { restarts, seed } => {
            let evaluate = |mask: u64| -> (Rat, Rectangle) {
                let mut partials: Vec<(Rat, u32)> = vec![(Rat::zero(), 0); reduced.opposite()];
                for s in 0..side {
                    if mask >> s & 1 == 1 {
                        reduced.apply(&mut partials, s, true);
                    }
                }
                reduced.materialize(mask, &partials)
            };
            let mut best = (Rat::zero(), Rectangle::default());
            for restart in 0..restarts {
                let mut rng = rng_from(child_seed(seed, restart as u64));
                let mut mask = if side >= 64 {
                    rand::Rng::random::<u64>(&mut rng)
                } else {
                    rand::Rng::random_range(&mut rng, 0..(1u64 << side))
                };
                let mut current = evaluate(mask);
                loop {
                    let mut improved: Option<(u64, (Rat, Rectangle))> = None;
                    for s in 0..side {
                        let neighbor = mask ^ (1 << s);
                        let cand = evaluate(neighbor);
                        if cand.0 > current.0 {
                            match &improved {
                                Some((_, cur)) if cand.0 <= cur.0 => {}
                                _ => improved = Some((neighbor, cand)),
                            }
                        }
                    }
                    match improved {
                        Some((m, cand)) => {
                            mask = m;
                            current = cand;
                        }
                        None => break,
                    }
                }
                if better(&best, &current) {
                    best = current;
                }
            }
            Ok(best)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperplaneBound {
    pub value: Rat,
    pub inner_product: Rat,
    pub sup_norm: Rat,
    pub max_rectangle: Rat,
    pub rectangle: Rectangle,
}

/// The hyperplane separation lower bound on the nonnegative rank of `s`.
pub fn hyperplane_bound(s: &[Vec<Rat>], w: &WeightMatrix) -> Result<HyperplaneBound, BoundsError> {
    let rows = s.len();
    let cols = s.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || rows != w.num_rows() || cols != w.num_cols() {
        return Err(BoundsError::DimensionMismatch);
    }
    if !w.has_positive_entry() {
        return Err(BoundsError::NoPositiveEntry);
    }
    let mut sup_norm = Rat::zero();
    let mut inner = Rat::zero();
    for i in 0..rows {
        if s[i].len() != cols {
            return Err(BoundsError::DimensionMismatch);
        }
        for j in 0..cols {
            if s[i][j].is_negative() {
                return Err(BoundsError::NegativeSlackEntry(i, j));
            }
            if s[i][j] > sup_norm {
                sup_norm = s[i][j].clone();
            }
            match &w.entries[i][j] {
                WeightEntry::Forbidden => {
                    if !s[i][j].is_zero() {
                        return Err(BoundsError::ForbiddenOnNonzero(i, j));
                    }
                    // forbidden * 0 contributes 0
                }
                WeightEntry::Finite(x) => {
                    inner = &inner + &(x * &s[i][j]);
                }
            }
        }
    }
    if sup_norm.is_zero() {
        return Err(BoundsError::DegenerateSlack);
    }
    let (max_rectangle, rectangle) = max_rectangle_value(w, RectangleMode::Exhaustive)?;
    if !max_rectangle.is_positive() {
        return Err(BoundsError::UndefinedBound);
    }
    let value = &inner / &(&sup_norm * &max_rectangle);
    Ok(HyperplaneBound {
        value,
        inner_product: inner,
        sup_norm,
        max_rectangle,
        rectangle,
    })
}

/// Fractional rectangle-cover lower bound on the nonnegative rank of the
/// support structure: minimize the total weight of all-nonzero rectangles
/// covering every nonzero entry. Exact rational LP over all maximal
/// rectangles (identical rows/columns are merged first).
pub fn rectangle_cover_bound(s: &[Vec<Rat>]) -> Result<Rat, BoundsError> {
    let rows = s.len();
    let cols = s.first().map_or(0, |r| r.len());
    let support: Vec<Vec<bool>> = s
        .iter()
        .map(|row| row.iter().map(|x| !x.is_zero()).collect())
        .collect();
    if !support.iter().flatten().any(|&b| b) {
        return Err(BoundsError::EmptySupport);
    }

    // Merge identical row and column patterns.
    let mut row_classes: Vec<Vec<bool>> = Vec::new();
    for i in 0..rows {
        if !row_classes.contains(&support[i]) {
            row_classes.push(support[i].clone());
        }
    }
    let col_pattern = |j: usize| -> Vec<bool> { (0..rows).map(|i| support[i][j]).collect() };
    let mut col_classes: Vec<Vec<bool>> = Vec::new();
    for j in 0..cols {
        let p = col_pattern(j);
        if !col_classes.contains(&p) {
            col_classes.push(p);
        }
    }
    // Reduced support: distinct rows x distinct cols. Entry is determined by
    // the pair of patterns.
    let r = row_classes.len();
    let c = col_classes.len();
    let mut reduced = vec![vec![false; c]; r];
    for (ci, cc) in col_classes.iter().enumerate() {
        // Find an original column with this pattern to read entries from.
        let j = (0..cols).find(|&j| col_pattern(j) == *cc).unwrap();
        for (ri, rc) in row_classes.iter().enumerate() {
            let i = (0..rows).find(|&i| support[i] == *rc).unwrap();
            reduced[ri][ci] = support[i][j];
        }
    }

    // Enumerate maximal all-true rectangles via closures of subsets of the
    // smaller side.
    let transpose = c < r;
    let (side, opposite) = if transpose { (c, r) } else { (r, c) };
    if side > EXHAUSTIVE_SIDE_CAP {
        return Err(BoundsError::CapExceeded {
            side,
            cap: EXHAUSTIVE_SIDE_CAP,
        });
    }
    let at = |s_idx: usize, o_idx: usize| -> bool {
        if transpose {
            reduced[o_idx][s_idx]
        } else {
            reduced[s_idx][o_idx]
        }
    };
    let mut rectangles: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    for mask in 1u64..(1u64 << side) {
        let members: Vec<usize> = (0..side).filter(|&s| mask >> s & 1 == 1).collect();
        let opp: Vec<usize> = (0..opposite)
            .filter(|&o| members.iter().all(|&s| at(s, o)))
            .collect();
        if opp.is_empty() {
            continue;
        }
        let closure: Vec<usize> = (0..side)
            .filter(|&s| opp.iter().all(|&o| at(s, o)))
            .collect();
        rectangles.insert((closure, opp));
    }
    let rectangles: Vec<(Vec<usize>, Vec<usize>)> = rectangles.into_iter().collect();

    // Covering LP over the reduced support cells.
    let mut lp_rows = Vec::new();
    for ri in 0..r {
        for ci in 0..c {
            let (si, oi) = if transpose { (ci, ri) } else { (ri, ci) };
            if !at(si, oi) {
                continue;
            }
            let coeffs: Vec<(usize, Rat)> = rectangles
                .iter()
                .enumerate()
                .filter(|(_, (ss, oo))| ss.contains(&si) && oo.contains(&oi))
                .map(|(v, _)| (v, Rat::one()))
                .collect();
            lp_rows.push(LpRow {
                coeffs,
                op: RowOp::Ge,
                rhs: Rat::one(),
            });
        }
    }
    let lp = LpProblem {
        num_vars: rectangles.len(),
        rows: lp_rows,
    };
    match minimize(&lp, &vec![Rat::one(); rectangles.len()]) {
        LpOutcome::Optimal { objective, .. } => Ok(objective),
        LpOutcome::Infeasible => unreachable!("per-cell rectangles always exist"),
        LpOutcome::Unbounded => unreachable!("covering objective is bounded below"),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NnmfConfig {
    pub rank: usize,
    pub restarts: usize,
    pub tolerance: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for NnmfConfig {
    fn default() -> Self {
        NnmfConfig {
            rank: 1,
            restarts: 10,
            tolerance: 1e-6,
            max_iters: 2000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NnmfOutcome {
    pub success: bool,
    pub best_error: f64,
    pub restart_errors: Vec<f64>,
    pub left_factor: Vec<Vec<f64>>,
    pub right_factor: Vec<Vec<f64>>,
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k) = (a.len(), b.len());
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for t in 0..k {
            let a_it = a[i][t];
            if a_it == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += a_it * b[t][j];
            }
        }
    }
    out
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = a.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0.0; n]; m];
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

fn max_abs_error(s: &[Vec<f64>], approx: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (row_s, row_a) in s.iter().zip(approx) {
        for (x, y) in row_s.iter().zip(row_a) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

/// Heuristic nonnegative factorization by multiplicative updates. Success
/// (max-norm reconstruction error below tolerance) certifies `rank⁺ <= rank`
/// up to floating-point trust; failure is inconclusive. Restarts run in
/// parallel with per-restart seeds; the reported best is deterministic.
pub fn nnmf_upper_bound(s: &[Vec<Rat>], cfg: &NnmfConfig) -> NnmfOutcome {
    assert!(cfg.rank >= 1, "rank target must be at least 1");
    let target: Vec<Vec<f64>> = s
        .iter()
        .map(|row| row.iter().map(|x| x.to_f64()).collect())
        .collect();
    let l = target.len();
    let m = target.first().map_or(0, |r| r.len());
    let mean: f64 = target.iter().flatten().sum::<f64>() / ((l * m).max(1) as f64);
    let scale = (mean.max(1e-12) / cfg.rank as f64).sqrt();
    let eps = 1e-12;

    let run = |restart: usize| -> (f64, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = rng_from(child_seed(cfg.seed, restart as u64));
        let mut init = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| scale * (0.05 + rand::Rng::random::<f64>(&mut rng)))
                        .collect()
                })
                .collect()
        };
        let mut u = init(l, cfg.rank);
        let mut v = init(cfg.rank, m);
        let mut best = f64::INFINITY;
        for iter in 0..cfg.max_iters {
            // u <- u * (S V^T) / (U V V^T)
            let vt = transpose(&v);
            let numer = mat_mul(&target, &vt);
            let denom = mat_mul(&mat_mul(&u, &v), &vt);
            for i in 0..l {
                for t in 0..cfg.rank {
                    u[i][t] *= numer[i][t] / (denom[i][t] + eps);
                    if !u[i][t].is_finite() {
                        u[i][t] = 0.0;
                    }
                }
            }
            // v <- v * (U^T S) / (U^T U V)
            let ut = transpose(&u);
            let numer = mat_mul(&ut, &target);
            let denom = mat_mul(&mat_mul(&ut, &u), &v);
            for t in 0..cfg.rank {
                for j in 0..m {
                    v[t][j] *= numer[t][j] / (denom[t][j] + eps);
                    if !v[t][j].is_finite() {
                        v[t][j] = 0.0;
                    }
                }
            }
            if iter % 10 == 9 || iter + 1 == cfg.max_iters {
                let err = max_abs_error(&target, &mat_mul(&u, &v));
                best = best.min(err);
                if err < cfg.tolerance {
                    break;
                }
            }
        }
        let err = max_abs_error(&target, &mat_mul(&u, &v));
        (best.min(err), u, v)
    };

    let results: Vec<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> =
        (0..cfg.restarts).into_par_iter().map(run).collect();
    let restart_errors: Vec<f64> = results.iter().map(|(e, _, _)| *e).collect();
    let best_idx = restart_errors
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(i.cmp(j)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (best_error, left_factor, right_factor) =
        results
            .into_iter()
            .nth(best_idx)
            .unwrap_or((f64::INFINITY, Vec::new(), Vec::new()));
    NnmfOutcome {
        success: best_error < cfg.tolerance,
        best_error,
        restart_errors,
        left_factor,
        right_factor,
    }
}

/// The trivial exact nonnegative factorization through distinct nonzero
/// rows: a 0/1 selector times the matrix of distinct rows. Returns the
/// factors and their inner dimension after verifying the product
/// reconstructs `s` exactly, so the rank is a certified upper bound on the
/// nonnegative rank.
pub fn distinct_row_factorization(s: &[Vec<Rat>]) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>, usize) {
    let cols = s.first().map_or(0, |r| r.len());
    let mut distinct: Vec<Vec<Rat>> = Vec::new();
    for row in s {
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        if !distinct.contains(row) {
            distinct.push(row.clone());
        }
    }
    let r = distinct.len();
    let selector: Vec<Vec<Rat>> = s
        .iter()
        .map(|row| {
            (0..r)
                .map(|t| {
                    if distinct[t] == *row {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    // Exact verification of the reconstruction.
    for (i, row) in s.iter().enumerate() {
        for j in 0..cols {
            let mut acc = Rat::zero();
            for t in 0..r {
                acc = &acc + &(&selector[i][t] * &distinct[t][j]);
            }
            assert_eq!(acc, row[j], "factorization mismatch at ({i},{j})");
        }
    }
    (selector, distinct, r)
}

/// Per-entry weights for a distribution over slack-matrix cells.
pub type CellWeights = BTreeMap<(usize, usize), Rat>;

/// Uniform distribution over the cells whose violation count equals `count`
/// (slack `count - 1`). Empty when no such cell exists.
pub fn uniform_over_violation_count(s: &SlackMatrix, count: usize) -> CellWeights {
    let want = Rat::from_int(count as i64 - 1);
    let cells: Vec<(usize, usize)> = s
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .skip(s.degree_cols)
                .filter(|(_, x)| **x == want)
                .map(move |(j, _)| (i, j))
                .collect::<Vec<_>>()
        })
        .collect();
    let mass = if cells.is_empty() {
        Rat::zero()
    } else {
        Rat::new(1, cells.len() as i64)
    };
    cells.into_iter().map(|c| (c, mass.clone())).collect()
}

/// The parity weight matrix: 1-violation entries are forbidden,
/// 3-violation entries get `+mu3`, `(4k+3)`-violation entries get
/// `-mu_heavy / (4k+2)`, everything else is zero.
pub fn build_parity_weight_matrix(
    s: &SlackMatrix,
    k: usize,
    mu3: &CellWeights,
    mu_heavy: &CellWeights,
) -> Result<WeightMatrix, BoundsError> {
    if k < 1 {
        return Err(BoundsError::BadK);
    }
    let heavy_count = 4 * k + 3;
    let scale = Rat::from_int(4 * k as i64 + 2);
    let mut entries = Vec::with_capacity(s.entries.len());
    for (i, row) in s.entries.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, x) in row.iter().enumerate() {
            if j < s.degree_cols {
                out.push(WeightEntry::Finite(Rat::zero()));
                continue;
            }
            let slack = x
                .to_integer()
                .filter(|v| *v >= 0)
                .ok_or(BoundsError::NonIntegerSlack(i, j))?;
            let count = slack as usize + 1;
            let entry = if count == 1 {
                WeightEntry::Forbidden
            } else if count == 3 {
                let w = mu3.get(&(i, j)).ok_or(BoundsError::MissingDistribution {
                    row: i,
                    col: j,
                    count: 3,
                })?;
                WeightEntry::Finite(w.clone())
            } else if count == heavy_count {
                let w = mu_heavy
                    .get(&(i, j))
                    .ok_or(BoundsError::MissingDistribution {
                        row: i,
                        col: j,
                        count: heavy_count,
                    })?;
                WeightEntry::Finite(-&(w / &scale))
            } else {
                WeightEntry::Finite(Rat::zero())
            };
            out.push(entry);
        }
        entries.push(out);
    }
    Ok(WeightMatrix { entries })
}
