//! Dense two-phase primal simplex.
//!
//! Every optimization in this crate is a small dense LP (a few hundred rows at
//! most), so the solver keeps a full tableau and uses Bland's rule for both
//! the entering and the leaving variable. Variables may carry arbitrary
//! (possibly infinite) bounds; they are mapped onto nonnegative standard-form
//! columns before the tableau is built.

use thiserror::Error;

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Reduced-cost tolerance for optimality.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Pivot budget shared by both phases.
pub const MAX_PIVOTS: usize = 1_000_000;

const PIVOT_TOL: f64 = 1e-12;
/// Upper limit on rebuild-and-resume rounds per phase.
const REFACTOR_ROUNDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    Validation(String),
    #[error("simplex did not terminate within {pivots} pivots")]
    NumericalFailure { pivots: usize },
}

/// A linear program in general form.
///
/// Unbounded variable bounds are expressed with `f64::NEG_INFINITY` /
/// `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: ObjectiveSense,
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<ConstraintSense>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// New problem with nonnegative variables and no constraints.
    pub fn new(sense: ObjectiveSense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn add_constraint(&mut self, row: Vec<f64>, sense: ConstraintSense, rhs: f64) -> &mut Self {
        self.rows.push(row);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.senses.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(LpError::Validation(format!(
                "{} rows but {} senses and {} right-hand sides",
                self.rows.len(),
                self.senses.len(),
                self.rhs.len()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Validation(format!(
                "{n} variables but {} lower and {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                return Err(LpError::Validation(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) || !self.rhs[i].is_finite() {
                return Err(LpError::Validation(format!("row {i} has a non-finite entry")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Validation("objective has a non-finite entry".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Validation(format!("variable {j} has invalid bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for ((row, sense), rhs) in self.rows.iter().zip(&self.senses).zip(&self.rhs) {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match sense {
                ConstraintSense::Le => lhs - rhs,
                ConstraintSense::Ge => rhs - lhs,
                ConstraintSense::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn status(&self) -> LpStatus {
        match self {
            LpResult::Optimal(_) => LpStatus::Optimal,
            LpResult::Infeasible => LpStatus::Infeasible,
            LpResult::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn solution(&self) -> Option<&LpSolution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lower + y
    Shifted { col: usize, lower: f64 },
    /// x = upper - y
    Reflected { col: usize, upper: f64 },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

/// Standard form: maximize c·y subject to A y (sense) b, y ≥ 0.
struct StandardForm {
    cost: Vec<f64>,
    rows: Vec<Vec<f64>>,
    senses: Vec<ConstraintSense>,
    rhs: Vec<f64>,
    map: Vec<VarMap>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let sign = match lp.sense {
            ObjectiveSense::Maximize => 1.0,
            ObjectiveSense::Minimize => -1.0,
        };
        let mut map = Vec::with_capacity(lp.num_vars());
        let mut cols = 0usize;
        for j in 0..lp.num_vars() {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            let m = if lo.is_finite() {
                VarMap::Shifted { col: cols, lower: lo }
            } else if hi.is_finite() {
                VarMap::Reflected { col: cols, upper: hi }
            } else {
                cols += 1;
                VarMap::Split { pos: cols - 1, neg: cols }
            };
            cols += 1;
            map.push(m);
        }

        let mut cost = vec![0.0; cols];
        for (j, m) in map.iter().enumerate() {
            let c = sign * lp.objective[j];
            match *m {
                VarMap::Shifted { col, .. } => cost[col] += c,
                VarMap::Reflected { col, .. } => cost[col] -= c,
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        let mut rows = Vec::with_capacity(lp.rows.len() + lp.num_vars());
        let mut senses = Vec::with_capacity(rows.capacity());
        let mut rhs = Vec::with_capacity(rows.capacity());
        for ((row, &sense), &b) in lp.rows.iter().zip(&lp.senses).zip(&lp.rhs) {
            let mut out = vec![0.0; cols];
            let mut r = b;
            for (j, m) in map.iter().enumerate() {
                let a = row[j];
                if a == 0.0 {
                    continue;
                }
                match *m {
                    VarMap::Shifted { col, lower } => {
                        out[col] += a;
                        r -= a * lower;
                    }
                    VarMap::Reflected { col, upper } => {
                        out[col] -= a;
                        r -= a * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        out[pos] += a;
                        out[neg] -= a;
                    }
                }
            }
            rows.push(out);
            senses.push(sense);
            rhs.push(r);
        }
        for (j, m) in map.iter().enumerate() {
            if let VarMap::Shifted { col, lower } = *m {
                if lp.upper[j].is_finite() {
                    let mut out = vec![0.0; cols];
                    out[col] = 1.0;
                    rows.push(out);
                    senses.push(ConstraintSense::Le);
                    rhs.push(lp.upper[j] - lower);
                }
            }
        }
        Self { cost, rows, senses, rhs, map }
    }

    fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, lower } => lower + y[col],
                VarMap::Reflected { col, upper } => upper - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect()
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// Constraint rows, each of length `width` (= columns + 1, rhs last).
    rows: Vec<Vec<f64>>,
    /// Reduced costs d_j = c_j - c_B B⁻¹ A_j; last entry is -(objective).
    reduced: Vec<f64>,
    basis: Vec<usize>,
    columns: usize,
    /// Columns that may not enter the basis (artificials in phase 2).
    blocked: Vec<bool>,
    pivots: usize,
    /// The initial rows, kept to rebuild the tableau without accumulated
    /// rounding error.
    original: Vec<Vec<f64>>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.columns]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.columns + 1;
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
                row[c] = 0.0;
            }
        }
        let f = self.reduced[c];
        if f != 0.0 {
            for k in 0..width {
                self.reduced[k] -= f * pivot_row[k];
            }
            self.reduced[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Recompute reduced costs for the cost vector `cost` and current basis.
    fn price(&mut self, cost: &[f64]) {
        let width = self.columns + 1;
        let mut reduced = vec![0.0; width];
        reduced[..self.columns].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for k in 0..width {
                    reduced[k] -= cb * self.rows[i][k];
                }
            }
        }
        for &b in &self.basis {
            reduced[b] = 0.0;
        }
        self.reduced = reduced;
    }

    /// Rebuild the rows as `B⁻¹ [A | b]` from the original data for the
    /// current basis, by Gauss-Jordan elimination with partial pivoting.
    /// Rows of the original system that end up without a basic variable are
    /// linearly dependent on the others and are dropped. Returns `false`, and
    /// leaves the tableau untouched, if the basis looks singular.
    fn refactor(&mut self) -> bool {
        let width = self.columns + 1;
        let mut work = self.original.clone();
        let mut assigned = vec![false; work.len()];
        let mut order = Vec::with_capacity(self.basis.len());
        for &c in &self.basis {
            let best = (0..work.len())
                .filter(|&r| !assigned[r])
                .max_by(|&a, &b| work[a][c].abs().total_cmp(&work[b][c].abs()));
            let Some(r) = best else { return false };
            let p = work[r][c];
            if p.abs() <= PIVOT_TOL {
                return false;
            }
            for v in work[r].iter_mut() {
                *v /= p;
            }
            work[r][c] = 1.0;
            let pivot_row = work[r].clone();
            for (i, row) in work.iter_mut().enumerate() {
                let f = row[c];
                if i != r && f != 0.0 {
                    for k in 0..width {
                        row[k] -= f * pivot_row[k];
                    }
                    row[c] = 0.0;
                }
            }
            assigned[r] = true;
            order.push(r);
        }
        self.rows = order.into_iter().map(|r| std::mem::take(&mut work[r])).collect();
        true
    }

    /// Simplex iterations for `cost`, with a rebuild from the original data
    /// whenever the method believes it is done, so that the final basis is
    /// judged on accurate numbers.
    fn optimize(&mut self, cost: &[f64]) -> Result<PhaseOutcome, LpError> {
        self.price(cost);
        for _ in 0..REFACTOR_ROUNDS {
            if let PhaseOutcome::Unbounded = self.run()? {
                return Ok(PhaseOutcome::Unbounded);
            }
            if !self.refactor() {
                break;
            }
            self.price(cost);
            if self.entering().is_none() {
                break;
            }
        }
        Ok(PhaseOutcome::Optimal)
    }

    fn entering(&self) -> Option<usize> {
        (0..self.columns).find(|&j| !self.blocked[j] && self.reduced[j] > OPTIMALITY_TOL)
    }

    /// Bland's rule iterations until optimality or unboundedness.
    fn run(&mut self) -> Result<PhaseOutcome, LpError> {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(LpError::NumericalFailure { pivots: self.pivots });
            }
            let Some(c) = self.entering() else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut best: Option<f64> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
                }
            }
            let Some(min_ratio) = best else {
                return Ok(PhaseOutcome::Unbounded);
            };
            let tie = PIVOT_TOL * (1.0 + min_ratio.abs());
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_TOL && self.rhs(i).max(0.0) / a <= min_ratio + tie {
                    leave = match leave {
                        Some(l) if self.basis[l] <= self.basis[i] => Some(l),
                        _ => Some(i),
                    };
                }
            }
            let r = leave.expect("ratio test found a row");
            self.pivot(r, c);
        }
    }
}

/// Solve `problem` with the two-phase primal simplex method.
pub fn solve_lp(problem: &LinearProgram) -> Result<LpResult, LpError> {
    problem.validate()?;
    let sf = StandardForm::build(problem);
    let n = sf.cost.len();
    let m = sf.rows.len();

    // Column layout: structural | slack/surplus | artificial | rhs.
    let n_slack = sf.senses.iter().filter(|s| **s != ConstraintSense::Eq).count();
    let mut needs_artificial = Vec::with_capacity(m);
    let mut normalized = Vec::with_capacity(m);
    for i in 0..m {
        let flip = sf.rhs[i] < 0.0;
        let sense = match (sf.senses[i], flip) {
            (ConstraintSense::Le, true) => ConstraintSense::Ge,
            (ConstraintSense::Ge, true) => ConstraintSense::Le,
            (s, _) => s,
        };
        needs_artificial.push(sense != ConstraintSense::Le);
        normalized.push((flip, sense));
    }
    let n_art = needs_artificial.iter().filter(|a| **a).count();
    let columns = n + n_slack + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_col = n;
    let mut art_col = n + n_slack;
    for i in 0..m {
        let (flip, sense) = normalized[i];
        let s = if flip { -1.0 } else { 1.0 };
        let mut row = vec![0.0; columns + 1];
        for j in 0..n {
            row[j] = s * sf.rows[i][j];
        }
        row[columns] = s * sf.rhs[i];
        match sense {
            ConstraintSense::Le => {
                row[slack_col] = 1.0;
                basis.push(slack_col);
                slack_col += 1;
            }
            ConstraintSense::Ge => {
                row[slack_col] = -1.0;
                slack_col += 1;
                row[art_col] = 1.0;
                basis.push(art_col);
                art_col += 1;
            }
            ConstraintSense::Eq => {
                row[art_col] = 1.0;
                basis.push(art_col);
                art_col += 1;
            }
        }
        rows.push(row);
    }

    let mut tab = Tableau {
        original: rows.clone(),
        rows,
        reduced: Vec::new(),
        basis,
        columns,
        blocked: vec![false; columns],
        pivots: 0,
    };
    let is_artificial = |j: usize| j >= n + n_slack;

    if n_art > 0 {
        let phase1_cost: Vec<f64> = (0..columns).map(|j| if is_artificial(j) { -1.0 } else { 0.0 }).collect();
        // Phase 1 is bounded below by zero, so Unbounded cannot occur.
        tab.optimize(&phase1_cost)?;
        let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| is_artificial(b))
            .map(|(i, _)| tab.rhs(i).max(0.0))
            .sum();
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(LpResult::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_artificial(tab.basis[i]) {
                let col = (0..n + n_slack).find(|&j| tab.rows[i][j].abs() > FEASIBILITY_TOL);
                match col {
                    Some(c) => tab.pivot(i, c),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in n + n_slack..columns {
            tab.blocked[j] = true;
        }
    }

    let mut phase2_cost = vec![0.0; columns];
    phase2_cost[..n].copy_from_slice(&sf.cost);
    match tab.optimize(&phase2_cost)? {
        PhaseOutcome::Unbounded => return Ok(LpResult::Unbounded),
        PhaseOutcome::Optimal => {}
    }

    let mut y = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            y[b] = tab.rhs(i).max(0.0);
        }
    }
    let x = sf.recover(&y);
    let objective = problem.objective_at(&x);
    Ok(LpResult::Optimal(LpSolution { x, objective }))
}
