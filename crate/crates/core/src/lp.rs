//! Dense two-phase simplex method.
//!
//! Every other module reduces its optimization and feasibility questions to
//! small linear programs, so this kernel favours determinism over speed:
//! the tableau is dense and pivoting follows Bland's rule (lowest index
//! entering column, lowest index leaving basic variable on ratio ties).
//! Identical inputs always produce bit-identical outputs.

use std::cell::Cell;

use crate::error::{check_dim, Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const RATIO_EPS: f64 = 1e-12;
const PHASE_ONE_TOL: f64 = 1e-9;

thread_local! {
    static SOLVE_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Number of LPs solved on the current thread since it started.
pub fn solve_count() -> u64 {
    SOLVE_COUNT.with(|c| c.get())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Amount by which `x` violates the constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program over `objective.len()` variables. Variables default to
/// the bounds `[0, +inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    /// A pure feasibility problem (zero objective).
    pub fn feasibility(n_vars: usize) -> Self {
        Self::new(Sense::Minimize, vec![0.0; n_vars])
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints
            .push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn with_constraint(mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.add_constraint(coeffs, relation, rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn set_free(&mut self, var: usize) {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY);
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        check_dim(n, self.bounds.len())?;
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("objective has non-finite coefficients"));
        }
        for c in &self.constraints {
            check_dim(n, c.coeffs.len())?;
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.rhs.is_finite() {
                return Err(Error::validation("constraint has non-finite coefficients"));
            }
        }
        for &(lo, hi) in &self.bounds {
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::validation(format!(
                    "invalid variable bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective value at `solution` (meaningful only when optimal).
    pub value: f64,
    pub solution: Vec<f64>,
    /// Dual multipliers of the original constraints, in the sign convention
    /// of the original sense: for a maximization, `<=` rows carry
    /// nonnegative duals and `>=` rows nonpositive ones.
    pub duals: Vec<f64>,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = offset + y
    Shifted { col: usize, offset: f64 },
    /// x = offset - y
    Mirrored { col: usize, offset: f64 },
    /// x = y+ - y-
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// m rows of length `n_cols + 1`; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced costs (length `n_cols + 1`; last entry is minus the objective).
    cost: Vec<f64>,
    basis: Vec<usize>,
    n_cols: usize,
    /// Columns that may never enter the basis (artificials in phase two).
    barred: Vec<bool>,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.n_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Installs the cost vector `c` (length n_cols) and prices out the basis.
    fn set_costs(&mut self, c: &[f64]) {
        let mut cost = c.to_vec();
        cost.push(0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let f = cost[b];
            if f != 0.0 {
                for (v, p) in cost.iter_mut().zip(&self.rows[r]) {
                    *v -= f * p;
                }
            }
        }
        self.cost = cost;
    }

    /// Runs Bland's-rule simplex to optimality. Returns false if unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let entering = (0..self.n_cols).find(|&j| !self.barred[j] && self.cost[j] < -COST_EPS);
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - RATIO_EPS
                                || (ratio <= bratio + RATIO_EPS && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves `lp` with the two-phase simplex method.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpResult> {
    lp.validate()?;
    SOLVE_COUNT.with(|c| c.set(c.get() + 1));

    let n = lp.n_vars();
    let m_orig = lp.constraints.len();

    // Map original variables onto nonnegative structural columns.
    let mut maps = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shifted {
                col: n_struct,
                offset: lo,
            });
            if hi.is_finite() {
                upper_rows.push((n_struct, hi - lo));
            }
            n_struct += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored {
                col: n_struct,
                offset: hi,
            });
            n_struct += 1;
        } else {
            maps.push(VarMap::Split {
                pos: n_struct,
                neg: n_struct + 1,
            });
            n_struct += 2;
        }
    }

    // Transformed rows over structural columns.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m_orig + upper_rows.len());
    for con in &lp.constraints {
        let mut a = vec![0.0; n_struct];
        let mut rhs = con.rhs;
        for (j, &coef) in con.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shifted { col, offset } => {
                    a[col] += coef;
                    rhs -= coef * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    a[col] -= coef;
                    rhs -= coef * offset;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        rows.push((a, con.relation, rhs));
    }
    for &(col, width) in &upper_rows {
        let mut a = vec![0.0; n_struct];
        a[col] = 1.0;
        rows.push((a, Relation::Le, width));
    }

    // Minimization costs over structural columns.
    let sign = match lp.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut c_struct = vec![0.0; n_struct];
    for (j, &coef) in lp.objective.iter().enumerate() {
        let c = sign * coef;
        match maps[j] {
            VarMap::Shifted { col, .. } => c_struct[col] += c,
            VarMap::Mirrored { col, .. } => c_struct[col] -= c,
            VarMap::Split { pos, neg } => {
                c_struct[pos] += c;
                c_struct[neg] -= c;
            }
        }
    }

    // Normalize to nonnegative rhs, then add slack/surplus/artificial columns.
    let m = rows.len();
    let mut flipped = vec![false; m];
    for (i, (a, rel, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            flipped[i] = true;
            for v in a.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let n_cols = n_struct + n_slack + n_art;
    let art_start = n_struct + n_slack;

    let mut t_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    // Column holding +e_i initially for each row; used to read duals.
    let mut unit_col = Vec::with_capacity(m);
    let mut next_slack = n_struct;
    let mut next_art = art_start;
    for (a, rel, rhs) in &rows {
        let mut row = vec![0.0; n_cols + 1];
        row[..n_struct].copy_from_slice(a);
        row[n_cols] = *rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                basis.push(next_slack);
                unit_col.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                basis.push(next_art);
                unit_col.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                basis.push(next_art);
                unit_col.push(next_art);
                next_art += 1;
            }
        }
        t_rows.push(row);
    }

    let mut tab = Tableau {
        rows: t_rows,
        cost: Vec::new(),
        basis,
        n_cols,
        barred: vec![false; n_cols],
    };

    // Phase one.
    if n_art > 0 {
        let mut c1 = vec![0.0; n_cols];
        for c in c1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        tab.set_costs(&c1);
        tab.optimize();
        let infeas = -tab.cost[n_cols];
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > PHASE_ONE_TOL * scale {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                solution: vec![f64::NAN; n],
                duals: vec![0.0; m_orig],
            });
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                let replacement = (0..art_start).find(|&j| tab.rows[r][j].abs() > 1e-9);
                match replacement {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for b in tab.barred.iter_mut().skip(art_start) {
            *b = true;
        }
    }

    // Phase two.
    let mut c2 = c_struct.clone();
    c2.resize(n_cols, 0.0);
    tab.set_costs(&c2);
    if !tab.optimize() {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            value: match lp.sense {
                Sense::Maximize => f64::INFINITY,
                Sense::Minimize => f64::NEG_INFINITY,
            },
            solution: vec![f64::NAN; n],
            duals: vec![0.0; m_orig],
        });
    }

    let mut y = vec![0.0; n_cols];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs(r).max(0.0);
    }
    let solution: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, offset } => offset + y[col],
            VarMap::Mirrored { col, offset } => offset - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();

    let duals = (0..m_orig)
        .map(|i| {
            let d = -tab.cost[unit_col[i]];
            let d = if flipped[i] { -d } else { d };
            sign * d
        })
        .collect();

    Ok(LpResult {
        status: LpStatus::Optimal,
        value: lp.objective_value(&solution),
        solution,
        duals,
    })
}

/// Phase-one only: any point satisfying `constraints` with `x >= 0`.
pub fn lp_feasible(n_vars: usize, constraints: &[Constraint]) -> Result<Option<Vec<f64>>> {
    let mut lp = LinearProgram::feasibility(n_vars);
    lp.constraints = constraints.to_vec();
    find_feasible(&lp)
}

/// Any point of the feasible region of `lp` (its objective is ignored).
pub fn find_feasible(lp: &LinearProgram) -> Result<Option<Vec<f64>>> {
    let mut probe = lp.clone();
    probe.objective = vec![0.0; lp.n_vars()];
    let res = lp_solve(&probe)?;
    Ok(match res.status {
        LpStatus::Optimal => Some(res.solution),
        _ => None,
    })
}
