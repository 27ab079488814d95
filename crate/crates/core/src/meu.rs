//! Receiver's maxmin-expected-utility response to a belief set and the
//! sender-preferred selection among the receiver's optimal strategies.
//!
//! The receiver's objective is linear in the belief, so the inner minimum
//! over a polytope is attained at a vertex. The maximin problem is the LP
//!
//! ```text
//! max v  s.t.  sum_a f(a) E_q[u_R(a, .)] >= v   for every vertex q,
//!              f in Δ(A).
//! ```
//!
//! The optimal set is kept implicit: it is the set of mixed actions meeting
//! every vertex constraint at level `v*`.

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, BeliefSet, Game, MixedAction, PayoffMatrix, FEASIBILITY_TOL};
use crate::error::{check_dim, Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpStatus, Relation};

/// Slack on `v*` in the tie-break LP.
pub const TIEBREAK_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeuResponse {
    /// Receiver's maxmin value.
    pub value: f64,
    /// One maximin strategy.
    pub strategy: MixedAction,
    /// Vertices attaining the inner minimum against `strategy`.
    pub binding_beliefs: Vec<Belief>,
    /// Expected receiver payoff of each action at each vertex
    /// (`vertex_values[q][a]`).
    #[serde(skip)]
    vertex_values: Vec<Vec<f64>>,
}

impl MeuResponse {
    /// Worst-case receiver payoff of `f` over the set.
    pub fn guaranteed(&self, f: &MixedAction) -> f64 {
        self.vertex_values
            .iter()
            .map(|row| row.iter().zip(f.probs()).map(|(u, p)| u * p).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// True if `f` is maximin-optimal up to `tol`.
    pub fn is_optimal(&self, f: &MixedAction, tol: f64) -> bool {
        self.guaranteed(f) >= self.value - tol
    }

    /// Sender-preferred maximin strategy evaluated at belief `p`.
    pub fn tiebreak(&self, game: &Game, p: &Belief) -> Result<MixedAction> {
        check_dim(game.n_states(), p.dim())?;
        let objective = game.sender.action_values(p);
        self.best_optimal_for(objective)
    }

    /// Maximizes a linear objective over the receiver's optimal strategies.
    pub(crate) fn best_optimal_for(&self, objective: Vec<f64>) -> Result<MixedAction> {
        let n = objective.len();
        let mut lp = LinearProgram::maximize(objective);
        for row in &self.vertex_values {
            lp.add_constraint(row.clone(), Relation::Ge, self.value - TIEBREAK_SLACK);
        }
        lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0);
        let res = lp_solve(&lp)?;
        if res.status != LpStatus::Optimal {
            return Err(Error::Internal(format!("tie-break LP {:?}", res.status)));
        }
        Ok(self.restore_optimality(MixedAction::from_approx(res.solution)))
    }

    /// Moves `f` toward the maximin strategy just far enough that every
    /// vertex constraint holds at `v*` again, removing the effect of the
    /// tie-break slack.
    fn restore_optimality(&self, f: MixedAction) -> MixedAction {
        let star = self.strategy.probs();
        let mut t: f64 = 0.0;
        for row in &self.vertex_values {
            let a: f64 = row.iter().zip(f.probs()).map(|(u, p)| u * p).sum();
            let b: f64 = row.iter().zip(star).map(|(u, p)| u * p).sum();
            let floor = self.value - 1e-12;
            if a < floor && b > a {
                t = t.max(((floor - a) / (b - a)).min(1.0));
            }
        }
        if t == 0.0 {
            return f;
        }
        MixedAction::from_approx(
            f.probs()
                .iter()
                .zip(star)
                .map(|(x, y)| (1.0 - t) * x + t * y)
                .collect(),
        )
    }

    /// Vertices of the receiver's optimal-strategy polytope, found by
    /// enumerating bases of its defining system. Sizes here are tiny.
    pub(crate) fn optimal_strategy_vertices(&self) -> Vec<MixedAction> {
        let n = self.strategy.n_actions();
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .vertex_values
            .iter()
            .map(|r| (r.clone(), self.value))
            .collect();
        for a in 0..n {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            rows.push((e, 0.0));
        }
        let mut out: Vec<MixedAction> = Vec::new();
        let tight_count = n - 1;
        for subset in itertools::Itertools::combinations(0..rows.len(), tight_count) {
            let mut a = vec![vec![1.0; n]];
            let mut b = vec![1.0];
            for &i in &subset {
                a.push(rows[i].0.clone());
                b.push(rows[i].1);
            }
            let Some(x) = solve_square(a, b) else {
                continue;
            };
            let feasible = x.iter().all(|&v| v >= -1e-9)
                && rows[..self.vertex_values.len()]
                    .iter()
                    .all(|(r, v)| r.iter().zip(&x).map(|(u, f)| u * f).sum::<f64>() >= v - 1e-7);
            if !feasible {
                continue;
            }
            let f = MixedAction::from_approx(x);
            if !out.iter().any(|g| {
                g.probs()
                    .iter()
                    .zip(f.probs())
                    .all(|(a, b)| (a - b).abs() < 1e-9)
            }) {
                out.push(f);
            }
        }
        if out.is_empty() {
            out.push(self.strategy.clone());
        }
        out
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Receiver's maxmin best response to `set`.
pub fn meu_best_response(game: &Game, set: &BeliefSet) -> Result<MeuResponse> {
    check_dim(game.n_states(), set.dim())?;
    let n = game.n_actions();
    let vertex_values: Vec<Vec<f64>> = set
        .vertices()
        .iter()
        .map(|q| game.receiver.action_values(q))
        .collect();

    // variables: f_0..f_{n-1}, v (free)
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.set_free(n);
    for row in &vertex_values {
        let mut r = row.clone();
        r.push(-1.0);
        lp.add_constraint(r, Relation::Ge, 0.0);
    }
    let mut r = vec![1.0; n];
    r.push(0.0);
    lp.add_constraint(r, Relation::Eq, 1.0);
    let res = lp_solve(&lp)?;
    if res.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("maximin LP {:?}", res.status)));
    }
    let strategy = MixedAction::from_approx(res.solution[..n].to_vec());
    let mut resp = MeuResponse {
        value: res.value,
        strategy,
        binding_beliefs: Vec::new(),
        vertex_values,
    };
    resp.value = resp.guaranteed(&resp.strategy);
    resp.binding_beliefs = set
        .vertices()
        .iter()
        .zip(&resp.vertex_values)
        .filter(|(_, row)| {
            let u: f64 = row
                .iter()
                .zip(resp.strategy.probs())
                .map(|(u, p)| u * p)
                .sum();
            u <= resp.value + FEASIBILITY_TOL
        })
        .map(|(q, _)| q.clone())
        .collect();
    Ok(resp)
}

/// `f̂_p(P)`: the maximin strategy against `set` the sender likes best when
/// outcomes are evaluated at `p`.
pub fn sender_tiebreak(game: &Game, set: &BeliefSet, p: &Belief) -> Result<MixedAction> {
    if !set.contains(p)? {
        return Err(Error::validation(format!(
            "evaluation belief {p} is not in {set}"
        )));
    }
    meu_best_response(game, set)?.tiebreak(game, p)
}

/// `sum_{a,w} f(a) matrix(a, w) p(w)`.
pub fn expected_payoff(matrix: &PayoffMatrix, f: &MixedAction, p: &Belief) -> Result<f64> {
    check_dim(matrix.n_actions(), f.n_actions())?;
    check_dim(matrix.n_states(), p.dim())?;
    Ok(matrix
        .action_values(p)
        .iter()
        .zip(f.probs())
        .map(|(u, fa)| u * fa)
        .sum())
}
