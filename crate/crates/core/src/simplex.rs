//! Exact two-phase dictionary simplex with Bland's anti-cycling rule.
//!
//! Instances here are tiny, so a dense rational tableau is the simplest
//! thing that is obviously correct. Variables are implicitly nonnegative.

use crate::rat::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    /// Sparse coefficients `(var, coeff)` on the structural variables.
    pub coeffs: Vec<(usize, Rat)>,
    pub op: RowOp,
    pub rhs: Rat,
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub num_vars: usize,
    pub rows: Vec<LpRow>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { objective: Rat, solution: Vec<Rat> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows[i][col], one row per constraint; last column is the rhs.
    rows: Vec<Vec<Rat>>,
    zrow: Vec<Rat>,
    zval: Rat,
    basis: Vec<usize>,
    num_structural: usize,
    first_artificial: usize,
    total_cols: usize,
}

impl Tableau {
    fn build(lp: &LpProblem) -> Tableau {
        let n = lp.num_vars;
        let m = lp.rows.len();
        // One slack/surplus per inequality row, artificials as needed.
        let mut num_slack = 0;
        for row in &lp.rows {
            if row.op != RowOp::Eq {
                num_slack += 1;
            }
        }
        let first_artificial = n + num_slack;
        let total_cols = first_artificial + m; // worst case: artificial per row
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
        let mut basis = vec![usize::MAX; m];
        let mut slack_idx = n;
        let mut next_artificial = first_artificial;

        for (i, row) in lp.rows.iter().enumerate() {
            let mut t = vec![Rat::zero(); total_cols + 1];
            for (j, c) in &row.coeffs {
                assert!(*j < n, "coefficient on unknown variable");
                t[*j] = &t[*j] + c;
            }
            let mut slack_col = None;
            match row.op {
                RowOp::Le => {
                    t[slack_idx] = Rat::one();
                    slack_col = Some(slack_idx);
                    slack_idx += 1;
                }
                RowOp::Ge => {
                    t[slack_idx] = -Rat::one();
                    slack_col = Some(slack_idx);
                    slack_idx += 1;
                }
                RowOp::Eq => {}
            }
            t[total_cols] = row.rhs.clone();
            if t[total_cols].is_negative() {
                for cell in t.iter_mut() {
                    *cell = -&*cell;
                }
            }
            // Use the slack as the basic variable when its coefficient is +1
            // after normalization; otherwise add an artificial.
            if let Some(sc) = slack_col {
                if t[sc] == Rat::one() {
                    basis[i] = sc;
                }
            }
            if basis[i] == usize::MAX {
                t[next_artificial] = Rat::one();
                basis[i] = next_artificial;
                next_artificial += 1;
            }
            rows.push(t);
        }

        Tableau {
            rows,
            zrow: vec![Rat::zero(); total_cols],
            zval: Rat::zero(),
            basis,
            num_structural: n,
            first_artificial,
            total_cols,
        }
    }

    /// Installs reduced costs for a cost vector over all columns.
    fn set_objective(&mut self, cost: &[Rat]) {
        self.zrow = cost.to_vec();
        self.zval = Rat::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            let cb = cost[b].clone();
            for j in 0..self.total_cols {
                let delta = &cb * &self.rows[i][j];
                self.zrow[j] = &self.zrow[j] - &delta;
            }
            self.zval = &self.zval - &(&cb * &self.rows[i][self.total_cols]);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        debug_assert!(!piv.is_zero());
        let inv = piv.recip();
        for cell in self.rows[r].iter_mut() {
            *cell = &*cell * &inv;
        }
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for j in 0..=self.total_cols {
                let delta = &factor * &self.rows[r][j];
                self.rows[i][j] = &self.rows[i][j] - &delta;
            }
        }
        if !self.zrow[c].is_zero() {
            let factor = self.zrow[c].clone();
            for j in 0..self.total_cols {
                let delta = &factor * &self.rows[r][j];
                self.zrow[j] = &self.zrow[j] - &delta;
            }
            self.zval = &self.zval - &(&factor * &self.rows[r][self.total_cols]);
        }
        self.basis[r] = c;
    }

    /// Bland's rule: entering column is the lowest index with a negative
    /// reduced cost, leaving row the lowest basic index among the
    /// minimum-ratio rows. Returns false on optimality.
    fn step(&mut self, allow_artificial: bool) -> Result<bool, ()> {
        let limit = if allow_artificial {
            self.total_cols
        } else {
            self.first_artificial
        };
        let entering = (0..limit).find(|&j| self.zrow[j].is_negative());
        let Some(c) = entering else {
            return Ok(false);
        };
        let mut best: Option<(Rat, usize, usize)> = None; // (ratio, basis var, row)
        for i in 0..self.rows.len() {
            if !self.rows[i][c].is_positive() {
                continue;
            }
            let ratio = &self.rows[i][self.total_cols] / &self.rows[i][c];
            let key = (ratio, self.basis[i], i);
            best = match best {
                None => Some(key),
                Some(cur) => {
                    if (key.0.clone(), key.1) < (cur.0.clone(), cur.1) {
                        Some(key)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        let Some((_, _, r)) = best else {
            return Err(()); // unbounded
        };
        self.pivot(r, c);
        Ok(true)
    }

    fn solution(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                x[b] = self.rows[i][self.total_cols].clone();
            }
        }
        x
    }
}

/// Minimizes `objective . x` subject to the rows of `lp` and `x >= 0`.
pub fn minimize(lp: &LpProblem, objective: &[Rat]) -> LpOutcome {
    assert_eq!(objective.len(), lp.num_vars);
    let mut t = Tableau::build(lp);

    // Phase 1: minimize the sum of artificial variables.
    let mut phase1_cost = vec![Rat::zero(); t.total_cols];
    for c in phase1_cost.iter_mut().skip(t.first_artificial) {
        *c = Rat::one();
    }
    t.set_objective(&phase1_cost);
    loop {
        match t.step(true) {
            Ok(true) => {}
            Ok(false) => break,
            Err(()) => unreachable!("phase-1 objective is bounded below by zero"),
        }
    }
    // zval tracks -objective for the current basis.
    if (-&t.zval).is_positive() {
        return LpOutcome::Infeasible;
    }
    // Pivot artificials out of the basis where possible; rows where this is
    // impossible are redundant and stay inert.
    for r in 0..t.rows.len() {
        if t.basis[r] >= t.first_artificial {
            if let Some(c) = (0..t.first_artificial).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    // Phase 2 on the real objective; artificial columns never re-enter.
    let mut phase2_cost = vec![Rat::zero(); t.total_cols];
    phase2_cost[..lp.num_vars].clone_from_slice(objective);
    t.set_objective(&phase2_cost);
    loop {
        match t.step(false) {
            Ok(true) => {}
            Ok(false) => break,
            Err(()) => return LpOutcome::Unbounded,
        }
    }
    LpOutcome::Optimal {
        objective: -&t.zval,
        solution: t.solution(),
    }
}

/// Phase-1 feasibility: a point satisfying all rows, if any exists.
pub fn feasible_point(lp: &LpProblem) -> Option<Vec<Rat>> {
    match minimize(lp, &vec![Rat::zero(); lp.num_vars]) {
        LpOutcome::Optimal { solution, .. } => Some(solution),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}
