//! Verifiable Bayes plausibility.
//!
//! A distribution over belief sets is verifiably Bayes plausible when one
//! posterior can be picked from each set so that the picks average back to
//! the prior. The set of all such selections is the feasible region of one
//! LP over convex weights `lambda[i][j]` on the vertices of each support set;
//! it is never materialized.

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, BeliefSet};
use crate::error::{check_dim, Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpStatus, Relation};

/// A finitely supported distribution over belief sets. Support entries are
/// kept as a list: equal sets at different indices stand for different
/// messages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSetDistribution")]
pub struct SetDistribution {
    support: Vec<BeliefSet>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetDistribution {
    support: Vec<BeliefSet>,
    weights: Vec<f64>,
}

impl TryFrom<RawSetDistribution> for SetDistribution {
    type Error = Error;
    fn try_from(raw: RawSetDistribution) -> Result<Self> {
        SetDistribution::new(raw.support, raw.weights)
    }
}

impl SetDistribution {
    pub fn new(support: Vec<BeliefSet>, weights: Vec<f64>) -> Result<Self> {
        check_dim(support.len(), weights.len())?;
        let Some(first) = support.first() else {
            return Err(Error::validation(
                "set distribution needs a nonempty support",
            ));
        };
        let n = first.dim();
        for s in &support {
            check_dim(n, s.dim())?;
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::validation("set weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "set weights sum to {total}, not 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { support, weights })
    }

    pub fn support(&self) -> &[BeliefSet] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    /// Same distribution with the support reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            support: order.iter().map(|&i| self.support[i].clone()).collect(),
            weights: order.iter().map(|&i| self.weights[i]).collect(),
        }
    }
}

/// One posterior per support set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    picks: Vec<Belief>,
}

impl Selection {
    pub fn new(picks: Vec<Belief>) -> Self {
        Self { picks }
    }

    pub fn picks(&self) -> &[Belief] {
        &self.picks
    }

    pub fn len(&self) -> usize {
        self.picks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.picks.is_empty()
    }

    /// `sum_i weights[i] * picks[i]`.
    pub fn average(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.picks.first().map_or(0, Belief::dim);
        let mut avg = vec![0.0; n];
        for (w, p) in weights.iter().zip(&self.picks) {
            for (a, x) in avg.iter_mut().zip(p.as_slice()) {
                *a += w * x;
            }
        }
        avg
    }

    /// Largest deviation of the weighted average of the picks from `prior`.
    pub fn residual(&self, mu: &SetDistribution, prior: &Belief) -> f64 {
        self.average(mu.weights())
            .iter()
            .zip(prior.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Picks lie in their sets and average to `prior` within `tol`.
    pub fn is_verifying(&self, mu: &SetDistribution, prior: &Belief, tol: f64) -> Result<bool> {
        if self.picks.len() != mu.len() {
            return Ok(false);
        }
        for (p, set) in self.picks.iter().zip(mu.support()) {
            if !set.contains(p)? {
                return Ok(false);
            }
        }
        Ok(self.residual(mu, prior) <= tol)
    }

    /// `t * self + (1 - t) * other`, set by set.
    pub fn blend(&self, other: &Selection, t: f64) -> Selection {
        Selection {
            picks: self
                .picks
                .iter()
                .zip(&other.picks)
                .map(|(a, b)| a.mix(b, t))
                .collect(),
        }
    }
}

/// Variable layout of the selection LP.
struct SelectionLp {
    lp: LinearProgram,
    offsets: Vec<usize>,
}

impl SelectionLp {
    fn new(mu: &SetDistribution, prior: &Belief) -> Result<Self> {
        check_dim(mu.dim(), prior.dim())?;
        let mut offsets = Vec::with_capacity(mu.len());
        let mut n_vars = 0;
        for s in mu.support() {
            offsets.push(n_vars);
            n_vars += s.n_vertices();
        }
        let mut lp = LinearProgram::feasibility(n_vars);
        for (i, s) in mu.support().iter().enumerate() {
            let mut row = vec![0.0; n_vars];
            for j in 0..s.n_vertices() {
                row[offsets[i] + j] = 1.0;
            }
            lp.add_constraint(row, Relation::Eq, 1.0);
        }
        for w in 0..prior.dim() {
            let mut row = vec![0.0; n_vars];
            for (i, s) in mu.support().iter().enumerate() {
                for (j, v) in s.vertices().iter().enumerate() {
                    row[offsets[i] + j] = mu.weights()[i] * v.get(w);
                }
            }
            lp.add_constraint(row, Relation::Eq, prior.get(w));
        }
        Ok(Self { lp, offsets })
    }

    /// Constrains the pick of set `i` to equal `q`.
    fn pin(&mut self, mu: &SetDistribution, i: usize, q: &Belief) -> Result<()> {
        check_dim(mu.dim(), q.dim())?;
        let set = &mu.support()[i];
        for w in 0..q.dim() {
            let mut row = vec![0.0; self.lp.n_vars()];
            for (j, v) in set.vertices().iter().enumerate() {
                row[self.offsets[i] + j] = v.get(w);
            }
            self.lp.add_constraint(row, Relation::Eq, q.get(w));
        }
        Ok(())
    }

    /// Objective `sum_i directions[i] · pick_i` (maximized).
    fn set_objective(&mut self, mu: &SetDistribution, directions: &[Vec<f64>]) -> Result<()> {
        check_dim(mu.len(), directions.len())?;
        let mut obj = vec![0.0; self.lp.n_vars()];
        for (i, (set, d)) in mu.support().iter().zip(directions).enumerate() {
            check_dim(mu.dim(), d.len())?;
            for (j, v) in set.vertices().iter().enumerate() {
                obj[self.offsets[i] + j] = v.dot(d);
            }
        }
        self.lp.objective = obj;
        self.lp.sense = crate::lp::Sense::Maximize;
        Ok(())
    }

    fn solve(&self, mu: &SetDistribution) -> Result<Option<(Selection, f64)>> {
        let res = lp_solve(&self.lp)?;
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Unbounded => return Err(Error::Internal("selection LP unbounded".into())),
        }
        let picks = mu
            .support()
            .iter()
            .enumerate()
            .map(|(i, set)| {
                let mut p = vec![0.0; set.dim()];
                for (j, v) in set.vertices().iter().enumerate() {
                    let lam = res.solution[self.offsets[i] + j].max(0.0);
                    for (x, y) in p.iter_mut().zip(v.as_slice()) {
                        *x += lam * y;
                    }
                }
                Belief::from_approx(p)
            })
            .collect();
        Ok(Some((Selection::new(picks), res.value)))
    }
}

/// A verifying selection of `mu`, or `None` if `mu` is not verifiably Bayes
/// plausible.
pub fn verify_vbp(mu: &SetDistribution, prior: &Belief) -> Result<Option<Selection>> {
    Ok(SelectionLp::new(mu, prior)?.solve(mu)?.map(|(s, _)| s))
}

/// A verifying selection with the given picks pinned, if one exists.
pub fn verify_vbp_pinned(
    mu: &SetDistribution,
    prior: &Belief,
    pins: &[(usize, &Belief)],
) -> Result<Option<Selection>> {
    let mut lp = SelectionLp::new(mu, prior)?;
    for &(i, q) in pins {
        if i >= mu.len() {
            return Err(Error::validation(format!("support index {i} out of range")));
        }
        lp.pin(mu, i, q)?;
    }
    Ok(lp.solve(mu)?.map(|(s, _)| s))
}

/// The verifying selection maximizing `sum_i directions[i] · pick_i`,
/// with its objective value.
pub fn extreme_selection(
    mu: &SetDistribution,
    prior: &Belief,
    directions: &[Vec<f64>],
) -> Result<Option<(Selection, f64)>> {
    let mut lp = SelectionLp::new(mu, prior)?;
    lp.set_objective(mu, directions)?;
    lp.solve(mu)
}

/// Whether `q` is a verifying posterior of support set `i`.
pub fn is_verifying_posterior(
    mu: &SetDistribution,
    prior: &Belief,
    i: usize,
    q: &Belief,
) -> Result<bool> {
    if !mu.support()[i].contains(q)? {
        return Ok(false);
    }
    Ok(verify_vbp_pinned(mu, prior, &[(i, q)])?.is_some())
}

fn direction_family(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = sign;
            dirs.push(d);
        }
    }
    for k in 0..n {
        for l in k + 1..n {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[k] = sign;
                d[l] = -sign;
                dirs.push(d);
            }
        }
    }
    dirs
}

/// The set of verifying posteriors of support set `i`.
///
/// Vertices are recovered from support queries: all signed coordinate
/// directions and pairwise differences, followed for three states by edge
/// normal queries until the polygon closes. The result is exact for up to
/// three states; with four or more it is the hull of the support points
/// found along the fixed direction family (an inner approximation).
pub fn verifying_posterior_set(
    mu: &SetDistribution,
    prior: &Belief,
    i: usize,
) -> Result<BeliefSet> {
    if i >= mu.len() {
        return Err(Error::validation(format!("support index {i} out of range")));
    }
    let n = mu.dim();
    let mut lp = SelectionLp::new(mu, prior)?;
    let mut support_point = |d: &[f64]| -> Result<Belief> {
        let mut dirs = vec![vec![0.0; n]; mu.len()];
        dirs[i] = d.to_vec();
        lp.set_objective(mu, &dirs)?;
        match lp.solve(mu)? {
            Some((sel, _)) => Ok(sel.picks()[i].clone()),
            None => Err(Error::NotVbp),
        }
    };
    let mut points: Vec<Belief> = Vec::new();
    for d in direction_family(n) {
        points.push(support_point(&d)?);
    }
    if n == 3 {
        close_polygon(&mut points, &mut support_point)?;
    }
    BeliefSet::new(points)
}

/// Adds support points along outward edge normals until no edge of the
/// hull (in the first two coordinates) can be pushed out.
fn close_polygon(
    points: &mut Vec<Belief>,
    support_point: &mut impl FnMut(&[f64]) -> Result<Belief>,
) -> Result<()> {
    for _ in 0..256 {
        let hull = hull_2d(points);
        if hull.len() <= 1 {
            return Ok(());
        }
        let mut added = false;
        let edges: Vec<(usize, usize)> = if hull.len() == 2 {
            vec![(0, 1), (1, 0)]
        } else {
            (0..hull.len()).map(|k| (k, (k + 1) % hull.len())).collect()
        };
        for (a, b) in edges {
            let (ax, ay) = hull[a];
            let (bx, by) = hull[b];
            // counter-clockwise hull: outward normal is (dy, -dx)
            let (nx, ny) = (by - ay, -(bx - ax));
            let len = (nx * nx + ny * ny).sqrt();
            if len < 1e-14 {
                continue;
            }
            let (nx, ny) = (nx / len, ny / len);
            let s = support_point(&[nx, ny, 0.0])?;
            if nx * s.get(0) + ny * s.get(1) > nx * ax + ny * ay + 1e-10 {
                points.push(s);
                added = true;
            }
        }
        if !added {
            return Ok(());
        }
    }
    Ok(())
}

/// Counter-clockwise convex hull of the first two coordinates.
fn hull_2d(points: &[Belief]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.get(0), p.get(1))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-13);
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-15
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-15
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Every support set equals its set of verifying posteriors.
pub fn is_fully_verified(mu: &SetDistribution, prior: &Belief) -> Result<bool> {
    if verify_vbp(mu, prior)?.is_none() {
        return Err(Error::NotVbp);
    }
    for (i, set) in mu.support().iter().enumerate() {
        for v in set.vertices() {
            if verify_vbp_pinned(mu, prior, &[(i, v)])?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Verifying posterior sets of every support set.
pub fn verifying_posterior_sets(mu: &SetDistribution, prior: &Belief) -> Result<Vec<BeliefSet>> {
    (0..mu.len())
        .map(|i| verifying_posterior_set(mu, prior, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[f64]) -> Belief {
        Belief::new(v.to_vec()).unwrap()
    }

    fn set(vs: &[&[f64]]) -> BeliefSet {
        BeliefSet::new(vs.iter().map(|v| b(v)).collect()).unwrap()
    }

    #[test]
    fn single_set_pins_prior() {
        let prior = b(&[0.4, 0.6]);
        let mu = SetDistribution::new(vec![set(&[&[0.1, 0.9], &[0.9, 0.1]])], vec![1.0]).unwrap();
        let sel = verify_vbp(&mu, &prior).unwrap().unwrap();
        assert!(sel.picks()[0].distance_inf(&prior) < 1e-9);
        let pmu = verifying_posterior_set(&mu, &prior, 0).unwrap();
        assert!(pmu.is_singleton());
        assert!(pmu.vertices()[0].distance_inf(&prior) < 1e-9);
    }

    #[test]
    fn fully_revealing_singletons() {
        let prior = b(&[0.3, 0.7]);
        let mu = SetDistribution::new(
            vec![set(&[&[1.0, 0.0]]), set(&[&[0.0, 1.0]])],
            vec![0.3, 0.7],
        )
        .unwrap();
        let sel = verify_vbp(&mu, &prior).unwrap().unwrap();
        assert!(sel.is_verifying(&mu, &prior, 1e-9).unwrap());
        assert!(is_fully_verified(&mu, &prior).unwrap());
    }

    #[test]
    fn componentwise_bound_rules_out_vbp() {
        let prior = b(&[0.3, 0.7]);
        for w in [0.1, 0.5, 0.9] {
            let mu = SetDistribution::new(
                vec![set(&[&[1.0, 0.0]]), set(&[&[0.9, 0.1]])],
                vec![w, 1.0 - w],
            )
            .unwrap();
            assert!(verify_vbp(&mu, &prior).unwrap().is_none());
            assert_eq!(is_fully_verified(&mu, &prior), Err(Error::NotVbp));
        }
    }

    #[test]
    fn pinned_posteriors_on_segment() {
        let prior = b(&[0.3, 0.7]);
        let mu = SetDistribution::new(
            vec![set(&[&[1.0, 0.0]]), set(&[&[0.0, 1.0], &[0.5, 0.5]])],
            vec![0.3, 0.7],
        )
        .unwrap();
        let p0 = verifying_posterior_set(&mu, &prior, 0).unwrap();
        let p1 = verifying_posterior_set(&mu, &prior, 1).unwrap();
        assert!(p0.is_singleton() && p0.vertices()[0].distance_inf(&b(&[1.0, 0.0])) < 1e-9);
        assert!(p1.is_singleton() && p1.vertices()[0].distance_inf(&b(&[0.0, 1.0])) < 1e-9);
        assert!(!is_fully_verified(&mu, &prior).unwrap());
    }

    #[test]
    fn reflected_segments_fully_verified() {
        let prior = b(&[0.5, 0.5]);
        let mu = SetDistribution::new(
            vec![
                set(&[&[1.0, 0.0], &[0.5, 0.5]]),
                set(&[&[0.0, 1.0], &[0.5, 0.5]]),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(is_fully_verified(&mu, &prior).unwrap());
        for i in 0..2 {
            let pm = verifying_posterior_set(&mu, &prior, i).unwrap();
            assert!(pm.same_set(&mu.support()[i]).unwrap());
        }
    }

    #[test]
    fn pinned_second_set_restricts_first() {
        let prior = b(&[0.5, 0.5]);
        let mu = SetDistribution::new(
            vec![set(&[&[1.0, 0.0], &[0.0, 1.0]]), set(&[&[0.9, 0.1]])],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(!is_fully_verified(&mu, &prior).unwrap());
        let pm = verifying_posterior_set(&mu, &prior, 0).unwrap();
        assert!(pm.is_singleton());
        assert!(pm.vertices()[0].distance_inf(&b(&[0.1, 0.9])) < 1e-9);
    }

    #[test]
    fn three_state_polygon_recovered() {
        // single set: P_mu = {prior}; two sets: intersection polygon
        let prior = Belief::uniform(3);
        let big = BeliefSet::simplex(3);
        let small = set(&[
            &[0.5, 0.3, 0.2],
            &[0.2, 0.5, 0.3],
            &[0.3, 0.2, 0.5],
            &[0.4, 0.4, 0.2],
        ]);
        let mu = SetDistribution::new(vec![big, small.clone()], vec![0.5, 0.5]).unwrap();
        let pm = verifying_posterior_set(&mu, &prior, 1).unwrap();
        // the first set is the whole simplex, so every point of the second is verified
        assert!(pm.same_set(&small).unwrap());
        // but the simplex corners cannot be matched by the small set
        assert!(!is_fully_verified(&mu, &prior).unwrap());
        let pm0 = verifying_posterior_set(&mu, &prior, 0).unwrap();
        let reflected: Vec<Belief> = small
            .vertices()
            .iter()
            .map(|v| Belief::new(v.as_slice().iter().map(|x| 2.0 / 3.0 - x).collect()).unwrap())
            .collect();
        assert!(pm0.same_set(&BeliefSet::new(reflected).unwrap()).unwrap());
    }

    #[test]
    fn selection_blend_stays_verifying() {
        let prior = b(&[0.5, 0.5]);
        let mu = SetDistribution::new(
            vec![
                set(&[&[1.0, 0.0], &[0.5, 0.5]]),
                set(&[&[0.0, 1.0], &[0.5, 0.5]]),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let (a, _) = extreme_selection(&mu, &prior, &[vec![1.0, 0.0], vec![0.0, 0.0]])
            .unwrap()
            .unwrap();
        let (c, _) = extreme_selection(&mu, &prior, &[vec![-1.0, 0.0], vec![0.0, 0.0]])
            .unwrap()
            .unwrap();
        for t in [0.0, 0.25, 0.6, 1.0] {
            assert!(a.blend(&c, t).is_verifying(&mu, &prior, 1e-9).unwrap());
        }
    }
}
