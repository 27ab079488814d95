//! Beliefs, belief polytopes, games, and simplex grids.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpStatus, Relation};

/// Tolerance for LP-backed membership and feasibility questions.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Tolerance for normalization identities (sums to one, Bayes plausibility).
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feasibility: f64,
    pub normalization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: FEASIBILITY_TOL,
            normalization: NORMALIZATION_TOL,
        }
    }
}

/// A probability vector over states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Normalizes a nonnegative weight vector into a belief.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("belief needs at least one state"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::validation(format!(
                "belief weights must be finite and nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::validation("belief weights sum to zero"));
        }
        Ok(Belief(weights.into_iter().map(|w| w / total).collect()))
    }

    /// Clamps round-off negatives to zero and renormalizes. Used on LP
    /// outputs that are beliefs up to solver precision.
    pub(crate) fn from_approx(weights: Vec<f64>) -> Self {
        let clamped: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        Belief(clamped.into_iter().map(|w| w / total).collect())
    }

    /// The degenerate belief on `state`.
    pub fn point_mass(n_states: usize, state: usize) -> Self {
        let mut w = vec![0.0; n_states];
        w[state] = 1.0;
        Belief(w)
    }

    pub fn uniform(n_states: usize) -> Self {
        Belief(vec![1.0 / n_states as f64; n_states])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    pub fn has_full_support(&self) -> bool {
        self.0.iter().all(|&w| w > 0.0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.0[i] > 0.0).collect()
    }

    pub fn distance_inf(&self, other: &Belief) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Belief, t: f64) -> Belief {
        Belief::from_approx(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect(),
        )
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn lex_cmp(&self, other: &Belief) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::validation(format!(
                "belief {v:?} does not sum to one"
            )));
        }
        Belief::new(v)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.0
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w:.6}")?;
        }
        write!(f, ")")
    }
}

/// Normalized belief from arbitrary nonnegative weights.
pub fn make_belief(weights: &[f64]) -> Result<Belief> {
    Belief::new(weights.to_vec())
}

/// Posterior proportional to `likelihood(w) * prior(w)`.
pub fn bayes_update(prior: &Belief, likelihood: &[f64]) -> Result<Belief> {
    check_dim(prior.dim(), likelihood.len())?;
    if likelihood.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::validation(
            "likelihood entries must be finite and nonnegative",
        ));
    }
    let joint: Vec<f64> = prior.0.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateMessage);
    }
    Ok(Belief(joint.into_iter().map(|j| j / total).collect()))
}

/// The convex hull of finitely many beliefs, stored as its vertices in
/// lexicographic order with redundant points removed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeliefSet {
    vertices: Vec<Belief>,
}

impl<'de> Deserialize<'de> for BeliefSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: Vec<Belief>,
        }
        let raw = Raw::deserialize(d)?;
        BeliefSet::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

impl BeliefSet {
    /// Builds the canonical representation of `conv(points)`.
    pub fn new(points: Vec<Belief>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::validation("belief set needs at least one vertex"));
        };
        let n = first.dim();
        for p in &points {
            check_dim(n, p.dim())?;
        }
        Ok(BeliefSet {
            vertices: canonical_vertices(points, FEASIBILITY_TOL),
        })
    }

    pub fn singleton(p: Belief) -> Self {
        BeliefSet { vertices: vec![p] }
    }

    /// The whole simplex.
    pub fn simplex(n_states: usize) -> Self {
        let mut vertices: Vec<Belief> = (0..n_states)
            .map(|i| Belief::point_mass(n_states, i))
            .collect();
        vertices.sort_by(|a, b| a.lex_cmp(b));
        BeliefSet { vertices }
    }

    pub fn vertices(&self) -> &[Belief] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn contains(&self, p: &Belief) -> Result<bool> {
        in_hull(p, self)
    }

    /// `self ⊆ other`, by vertex membership.
    pub fn is_subset_of(&self, other: &BeliefSet) -> Result<bool> {
        for v in &self.vertices {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Set equality as two-sided vertex membership.
    pub fn same_set(&self, other: &BeliefSet) -> Result<bool> {
        Ok(self.is_subset_of(other)? && other.is_subset_of(self)?)
    }

    /// Hausdorff distance (sup norm) between two canonical vertex lists of
    /// equal length; `None` when the vertex counts differ.
    pub fn vertex_distance(&self, other: &BeliefSet) -> Option<f64> {
        if self.n_vertices() != other.n_vertices() {
            return None;
        }
        let d = |a: &BeliefSet, b: &BeliefSet| {
            a.vertices
                .iter()
                .map(|v| {
                    b.vertices
                        .iter()
                        .map(|w| v.distance_inf(w))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        Some(d(self, other).max(d(other, self)))
    }

    /// Convex weights over the vertices that reproduce `p`, chosen to
    /// maximize the smallest weight. `None` if `p` is outside the set.
    pub fn interior_weights(&self, p: &Belief) -> Result<Option<Vec<f64>>> {
        check_dim(self.dim(), p.dim())?;
        if !self.contains(p)? {
            return Ok(None);
        }
        let k = self.n_vertices();
        if k == 1 {
            return Ok(Some(vec![1.0]));
        }
        // variables: lambda_0..lambda_{k-1}, t
        let mut obj = vec![0.0; k + 1];
        obj[k] = 1.0;
        let mut lp = LinearProgram::maximize(obj);
        for w in 0..self.dim() {
            let mut row: Vec<f64> = self.vertices.iter().map(|v| v.get(w)).collect();
            row.push(0.0);
            lp.add_constraint(row, Relation::Eq, p.get(w));
        }
        let mut row = vec![1.0; k];
        row.push(0.0);
        lp.add_constraint(row, Relation::Eq, 1.0);
        for j in 0..k {
            let mut row = vec![0.0; k + 1];
            row[j] = 1.0;
            row[k] = -1.0;
            lp.add_constraint(row, Relation::Ge, 0.0);
        }
        let res = lp_solve(&lp)?;
        if res.status != LpStatus::Optimal {
            // Membership passed at tolerance but the exact system is
            // infeasible; fall back to the closest representation.
            return Ok(Some(closest_weights(p, &self.vertices)?.1));
        }
        let lambda: Vec<f64> = res.solution[..k].iter().map(|v| v.max(0.0)).collect();
        let total: f64 = lambda.iter().sum();
        Ok(Some(lambda.into_iter().map(|v| v / total).collect()))
    }

    /// True if `p` lies in the relative interior (every vertex carries
    /// positive weight in some representation of `p`).
    pub fn in_relative_interior(&self, p: &Belief) -> Result<bool> {
        Ok(match self.interior_weights(p)? {
            Some(w) => w.iter().all(|&x| x > FEASIBILITY_TOL),
            None => false,
        })
    }

    fn key(&self) -> Vec<u64> {
        self.vertices
            .iter()
            .flat_map(|v| v.0.iter().map(|x| x.to_bits()))
            .collect()
    }

    /// Fewest vertices first, then lexicographic on the vertex list.
    pub fn preference_cmp(&self, other: &BeliefSet) -> Ordering {
        self.n_vertices().cmp(&other.n_vertices()).then_with(|| {
            for (a, b) in self.vertices.iter().zip(&other.vertices) {
                match a.lex_cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }

    pub(crate) fn dedup_key(&self) -> Vec<u64> {
        self.key()
    }
}

impl fmt::Display for BeliefSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conv{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

fn canonical_vertices(mut points: Vec<Belief>, tol: f64) -> Vec<Belief> {
    points.sort_by(|a, b| a.lex_cmp(b));
    points.dedup_by(|a, b| a.distance_inf(b) <= NORMALIZATION_TOL);
    if points.len() <= 1 {
        return points;
    }
    if points[0].dim() == 2 {
        // On a segment the hull is spanned by the two extreme points.
        let lo = points
            .iter()
            .min_by(|a, b| a.0[0].total_cmp(&b.0[0]))
            .cloned()
            .unwrap();
        let hi = points
            .iter()
            .max_by(|a, b| a.0[0].total_cmp(&b.0[0]))
            .cloned()
            .unwrap();
        if hi.0[0] - lo.0[0] <= tol {
            return vec![lo];
        }
        return vec![lo, hi];
    }
    let mut i = 0;
    while i < points.len() && points.len() > 1 {
        let others: Vec<Belief> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let redundant = hull_distance(&points[i], &others)
            .map(|d| d <= tol)
            .unwrap_or(false);
        if redundant {
            points.remove(i);
        } else {
            i += 1;
        }
    }
    points
}

/// L1 distance from `p` to the convex hull of `vertices`, together with the
/// convex weights of the closest point.
fn closest_weights(p: &Belief, vertices: &[Belief]) -> Result<(f64, Vec<f64>)> {
    let n = p.dim();
    let k = vertices.len();
    // variables: lambda (k), e_plus (n), e_minus (n)
    let mut obj = vec![0.0; k + 2 * n];
    for c in obj.iter_mut().skip(k) {
        *c = 1.0;
    }
    let mut lp = LinearProgram::minimize(obj);
    for w in 0..n {
        let mut row = vec![0.0; k + 2 * n];
        for (j, v) in vertices.iter().enumerate() {
            check_dim(n, v.dim())?;
            row[j] = v.get(w);
        }
        row[k + w] = 1.0;
        row[k + n + w] = -1.0;
        lp.add_constraint(row, Relation::Eq, p.get(w));
    }
    let mut row = vec![0.0; k + 2 * n];
    for c in row.iter_mut().take(k) {
        *c = 1.0;
    }
    lp.add_constraint(row, Relation::Eq, 1.0);
    let res = lp_solve(&lp)?;
    if res.status != LpStatus::Optimal {
        return Err(Error::Internal("hull distance LP not optimal".into()));
    }
    Ok((res.value.max(0.0), res.solution[..k].to_vec()))
}

/// L1 distance from `p` to `conv(vertices)`.
pub fn hull_distance(p: &Belief, vertices: &[Belief]) -> Result<f64> {
    if let Some(v) = vertices.first() {
        if v.dim() == 2 {
            check_dim(2, p.dim())?;
            let lo = vertices
                .iter()
                .map(|v| v.0[0])
                .fold(f64::INFINITY, f64::min);
            let hi = vertices
                .iter()
                .map(|v| v.0[0])
                .fold(f64::NEG_INFINITY, f64::max);
            let x = p.0[0];
            return Ok(2.0 * (lo - x).max(x - hi).max(0.0));
        }
    }
    Ok(closest_weights(p, vertices)?.0)
}

/// Whether `p` is a convex combination of the vertices of `set`, at
/// tolerance [`FEASIBILITY_TOL`].
pub fn in_hull(p: &Belief, set: &BeliefSet) -> Result<bool> {
    check_dim(set.dim(), p.dim())?;
    Ok(hull_distance(p, &set.vertices)? <= FEASIBILITY_TOL)
}

/// A payoff table indexed by (action, state).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PayoffMatrix {
    rows: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::validation("payoff matrix needs at least one action"));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::validation("payoff matrix needs at least one state"));
        }
        for r in &rows {
            check_dim(n, r.len())?;
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation("payoffs must be finite"));
            }
        }
        Ok(Self { rows })
    }

    pub fn n_actions(&self) -> usize {
        self.rows.len()
    }

    pub fn n_states(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, action: usize, state: usize) -> f64 {
        self.rows[action][state]
    }

    pub fn row(&self, action: usize) -> &[f64] {
        &self.rows[action]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Expected payoff of each pure action at belief `p`.
    pub fn action_values(&self, p: &Belief) -> Vec<f64> {
        self.rows.iter().map(|r| p.dot(r)).collect()
    }

    /// State-wise payoff of the mixed action `f`.
    pub fn state_values(&self, f: &MixedAction) -> Vec<f64> {
        (0..self.n_states())
            .map(|w| f.0.iter().zip(&self.rows).map(|(fa, r)| fa * r[w]).sum())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for PayoffMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        PayoffMatrix::new(rows)
    }
}

impl From<PayoffMatrix> for Vec<Vec<f64>> {
    fn from(m: PayoffMatrix) -> Self {
        m.rows
    }
}

/// A receiver strategy: a probability vector over actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedAction(Vec<f64>);

impl MixedAction {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::validation(format!("invalid mixed action {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL * probs.len() as f64 {
            return Err(Error::validation(format!(
                "mixed action {probs:?} does not sum to one"
            )));
        }
        Ok(Self(probs))
    }

    pub(crate) fn from_approx(probs: Vec<f64>) -> Self {
        let clamped: Vec<f64> = probs.into_iter().map(|p| p.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        Self(clamped.into_iter().map(|p| p / total).collect())
    }

    pub fn pure(n_actions: usize, action: usize) -> Self {
        let mut v = vec![0.0; n_actions];
        v[action] = 1.0;
        Self(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn n_actions(&self) -> usize {
        self.0.len()
    }
}

/// A finite persuasion game: states, full-support prior, actions, and the
/// sender's and receiver's payoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGame")]
pub struct Game {
    pub states: Vec<String>,
    pub prior: Belief,
    pub actions: Vec<String>,
    #[serde(rename = "u_S")]
    pub sender: PayoffMatrix,
    #[serde(rename = "u_R")]
    pub receiver: PayoffMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    states: Vec<String>,
    prior: Belief,
    actions: Vec<String>,
    #[serde(rename = "u_S")]
    sender: PayoffMatrix,
    #[serde(rename = "u_R")]
    receiver: PayoffMatrix,
}

impl TryFrom<RawGame> for Game {
    type Error = Error;
    fn try_from(raw: RawGame) -> Result<Self> {
        Game::new(raw.states, raw.prior, raw.actions, raw.sender, raw.receiver)
    }
}

impl Game {
    pub fn new(
        states: Vec<String>,
        prior: Belief,
        actions: Vec<String>,
        sender: PayoffMatrix,
        receiver: PayoffMatrix,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::validation("game needs at least one state"));
        }
        if actions.is_empty() {
            return Err(Error::validation("game needs at least one action"));
        }
        check_dim(n, prior.dim())?;
        if !prior.has_full_support() {
            return Err(Error::validation("prior must have full support"));
        }
        for m in [&sender, &receiver] {
            check_dim(actions.len(), m.n_actions())?;
            check_dim(n, m.n_states())?;
        }
        Ok(Self {
            states,
            prior,
            actions,
            sender,
            receiver,
        })
    }

    /// Game with generic labels `s0..`, `a0..`.
    pub fn from_matrices(
        prior: Belief,
        sender: Vec<Vec<f64>>,
        receiver: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let sender = PayoffMatrix::new(sender)?;
        let receiver = PayoffMatrix::new(receiver)?;
        let states = (0..prior.dim()).map(|i| format!("s{i}")).collect();
        let actions = (0..sender.n_actions()).map(|i| format!("a{i}")).collect();
        Self::new(states, prior, actions, sender, receiver)
    }

    /// States (innocent, guilty); the receiver wants to match the state,
    /// the sender always wants a conviction.
    pub fn prosecutor(prior_guilty: f64) -> Result<Self> {
        Self::new(
            vec!["innocent".into(), "guilty".into()],
            Belief::new(vec![1.0 - prior_guilty, prior_guilty])?,
            vec!["acquit".into(), "convict".into()],
            PayoffMatrix::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]])?,
            PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?,
        )
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn with_prior(&self, prior: Belief) -> Result<Self> {
        Self::new(
            self.states.clone(),
            prior,
            self.actions.clone(),
            self.sender.clone(),
            self.receiver.clone(),
        )
    }
}

/// Resolution `k` of the simplex grid: all beliefs whose coordinates are
/// multiples of `1/k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: u32,
}

impl GridSpec {
    pub fn new(resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::validation("grid resolution must be positive"));
        }
        Ok(Self { resolution })
    }

    /// Number of grid points on the simplex over `n_states` states.
    pub fn size(&self, n_states: usize) -> u128 {
        binomial(
            self.resolution as u128 + n_states as u128 - 1,
            n_states as u128 - 1,
        )
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Integer compositions of `total` into `parts` parts, first part descending.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            rec(remaining - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// All beliefs on the resolution-`k` grid, in descending lexicographic order
/// (the first point is the mass on state 0).
pub fn simplex_grid(spec: GridSpec, n_states: usize) -> Vec<Belief> {
    let k = spec.resolution as f64;
    compositions(spec.resolution, n_states)
        .into_iter()
        .map(|c| Belief(c.into_iter().map(|x| x as f64 / k).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[f64]) -> Belief {
        Belief::new(v.to_vec()).unwrap()
    }

    #[test]
    fn make_belief_examples() {
        assert_eq!(make_belief(&[1.0, 1.0]).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(make_belief(&[2.0, 0.0]).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(make_belief(&[0.3, 0.7]).unwrap().as_slice(), &[0.3, 0.7]);
        assert!(make_belief(&[0.0, 0.0]).is_err());
        assert!(make_belief(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn bayes_update_examples() {
        let p = bayes_update(&b(&[0.5, 0.5]), &[1.0, 0.0]).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0]);
        let p = bayes_update(&b(&[0.3, 0.7]), &[1.0, 1.0]).unwrap();
        assert!(p.distance_inf(&b(&[0.3, 0.7])) < 1e-15);
        let p = bayes_update(&b(&[0.5, 0.5]), &[0.2, 0.8]).unwrap();
        assert!(p.distance_inf(&b(&[0.2, 0.8])) < 1e-15);
        assert_eq!(
            bayes_update(&b(&[1.0, 0.0]), &[0.0, 1.0]),
            Err(Error::DegenerateMessage)
        );
    }

    #[test]
    fn in_hull_examples() {
        let seg = BeliefSet::new(vec![b(&[0.2, 0.8]), b(&[0.8, 0.2])]).unwrap();
        assert!(in_hull(&b(&[0.2, 0.8]), &seg).unwrap());
        assert!(in_hull(&b(&[0.5, 0.5]), &seg).unwrap());
        let short = BeliefSet::new(vec![b(&[0.2, 0.8]), b(&[0.4, 0.6])]).unwrap();
        assert!(!in_hull(&b(&[0.5, 0.5]), &short).unwrap());
        assert!(matches!(
            in_hull(&b(&[0.3, 0.3, 0.4]), &seg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn in_hull_three_states() {
        let tri = BeliefSet::new(vec![
            b(&[0.6, 0.2, 0.2]),
            b(&[0.2, 0.6, 0.2]),
            b(&[0.2, 0.2, 0.6]),
        ])
        .unwrap();
        assert!(tri.contains(&Belief::uniform(3)).unwrap());
        assert!(!tri.contains(&b(&[0.1, 0.45, 0.45])).unwrap());
        for v in tri.vertices() {
            assert!(tri.contains(v).unwrap());
        }
    }

    #[test]
    fn canonicalization_drops_interior_points() {
        let set = BeliefSet::new(vec![
            b(&[1.0, 0.0, 0.0]),
            b(&[0.0, 1.0, 0.0]),
            b(&[0.0, 0.0, 1.0]),
            Belief::uniform(3),
            b(&[0.5, 0.5, 0.0]),
        ])
        .unwrap();
        assert_eq!(set.n_vertices(), 3);
        let seg = BeliefSet::new(vec![
            b(&[0.2, 0.8]),
            b(&[0.5, 0.5]),
            b(&[0.8, 0.2]),
            b(&[0.5, 0.5]),
        ])
        .unwrap();
        assert_eq!(seg.n_vertices(), 2);
    }

    #[test]
    fn grid_examples() {
        let g = simplex_grid(GridSpec::new(1).unwrap(), 2);
        assert_eq!(g, vec![b(&[1.0, 0.0]), b(&[0.0, 1.0])]);
        let g = simplex_grid(GridSpec::new(2).unwrap(), 2);
        assert_eq!(g, vec![b(&[1.0, 0.0]), b(&[0.5, 0.5]), b(&[0.0, 1.0])]);
        let g = simplex_grid(GridSpec::new(2).unwrap(), 3);
        assert_eq!(g.len(), 6);
        assert_eq!(GridSpec::new(2).unwrap().size(3), 6);
        assert!(GridSpec::new(0).is_err());
    }

    #[test]
    fn interior_weights_prefer_relative_interior() {
        let seg = BeliefSet::new(vec![b(&[0.2, 0.8]), b(&[0.8, 0.2])]).unwrap();
        let w = seg.interior_weights(&b(&[0.5, 0.5])).unwrap().unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert!(seg.in_relative_interior(&b(&[0.5, 0.5])).unwrap());
        assert!(!seg.in_relative_interior(&b(&[0.2, 0.8])).unwrap());
        assert!(seg.interior_weights(&b(&[0.9, 0.1])).unwrap().is_none());
    }

    #[test]
    fn game_rejects_partial_support_prior() {
        let err = Game::from_matrices(b(&[1.0, 0.0]), vec![vec![0.0, 0.0]], vec![vec![0.0, 0.0]]);
        assert!(err.is_err());
        let err = Game::from_matrices(
            b(&[0.5, 0.5]),
            vec![vec![0.0, 0.0]],
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
        );
        assert!(err.is_err());
    }
}
