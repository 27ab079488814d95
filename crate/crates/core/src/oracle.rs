//! Brute-force baselines kept apart from the solver. Nothing here touches
//! the simplex code: maximin values come from enumerating bases with a
//! local elimination routine, and devices are enumerated on a grid.

use serde::{Deserialize, Serialize};

use crate::belief::{simplex_grid, Belief, Game, GridSpec, PayoffMatrix};
use crate::error::{Error, Result};

/// Receiver strategies within this of the maximin value count as optimal.
const OPTIMAL_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Device entries are multiples of `1 / device_steps`.
    pub device_steps: u32,
    pub max_messages: usize,
    pub max_generators: usize,
    /// Resolution of the grid searched by [`brute_force_value`].
    pub value_grid: u32,
    /// Largest number of grid points added to `{p}`.
    pub max_vertices: usize,
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            device_steps: 10,
            max_messages: 3,
            max_generators: 2,
            value_grid: 10,
            max_vertices: 2,
            budget: 100_000_000,
        }
    }
}

impl OracleConfig {
    pub fn step(&self) -> f64 {
        1.0 / self.device_steps as f64
    }

    fn validate(&self) -> Result<()> {
        if self.device_steps == 0 || self.value_grid == 0 {
            return Err(Error::validation("oracle grids need positive resolution"));
        }
        if self.max_messages == 0 || !(1..=2).contains(&self.max_generators) {
            return Err(Error::validation(
                "oracle supports 1 or more messages and 1 or 2 generators",
            ));
        }
        Ok(())
    }
}

/// Gaussian elimination with partial pivoting.
fn eliminate(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
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

fn choose(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Maximin value of the receiver against a finite list of beliefs and the
/// extreme points of the optimal strategy set.
#[derive(Clone, Debug, PartialEq)]
pub struct Maximin {
    pub value: f64,
    pub optimal: Vec<Vec<f64>>,
}

/// Exact maximin by enumerating every basic solution of
/// `{f >= 0, sum f = 1, f · r_q >= v}`.
pub fn enumerated_maximin(receiver: &PayoffMatrix, beliefs: &[Vec<f64>]) -> Maximin {
    let n = receiver.n_actions();
    let rows: Vec<Vec<f64>> = beliefs
        .iter()
        .map(|q| {
            (0..n)
                .map(|a| receiver.row(a).iter().zip(q).map(|(u, p)| u * p).sum())
                .collect()
        })
        .collect();
    let guarantee = |f: &[f64]| {
        rows.iter()
            .map(|r| r.iter().zip(f).map(|(x, y)| x * y).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    // Tight rows: indices below rows.len() are belief rows, the rest are f_a = 0.
    choose(rows.len() + n, n, &mut |tight| {
        let mut a = vec![{
            let mut r = vec![1.0; n];
            r.push(0.0);
            r
        }];
        let mut b = vec![1.0];
        for &t in tight {
            if t < rows.len() {
                let mut r = rows[t].clone();
                r.push(-1.0);
                a.push(r);
            } else {
                let mut r = vec![0.0; n + 1];
                r[t - rows.len()] = 1.0;
                a.push(r);
            }
            b.push(0.0);
        }
        let Some(x) = eliminate(a, b) else { return };
        if x[..n].iter().any(|&p| p < -FEAS_TOL) {
            return;
        }
        let total: f64 = x[..n].iter().map(|p| p.max(0.0)).sum();
        let f: Vec<f64> = x[..n].iter().map(|p| p.max(0.0) / total).collect();
        let g = guarantee(&f);
        if g < x[n] - 1e-8 {
            return;
        }
        found.push((g, f));
    });
    let value = found
        .iter()
        .map(|(g, _)| *g)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut optimal: Vec<Vec<f64>> = Vec::new();
    for (g, f) in found {
        if g >= value - OPTIMAL_TOL
            && !optimal
                .iter()
                .any(|h| h.iter().zip(&f).all(|(x, y)| (x - y).abs() < 1e-9))
        {
            optimal.push(f);
        }
    }
    Maximin { value, optimal }
}

/// Maximin for two actions by ternary search on the probability of the
/// first action. Returns that probability and the value.
pub fn ternary_maximin(receiver: &PayoffMatrix, beliefs: &[Vec<f64>]) -> Result<(f64, f64)> {
    if receiver.n_actions() != 2 {
        return Err(Error::validation(
            "ternary maximin needs exactly two actions",
        ));
    }
    let rows: Vec<(f64, f64)> = beliefs
        .iter()
        .map(|q| {
            let v = |a: usize| {
                receiver
                    .row(a)
                    .iter()
                    .zip(q)
                    .map(|(u, p)| u * p)
                    .sum::<f64>()
            };
            (v(0), v(1))
        })
        .collect();
    let h = |t: f64| {
        rows.iter()
            .map(|(x, y)| t * x + (1.0 - t) * y)
            .fold(f64::INFINITY, f64::min)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if h(m1) < h(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let t = 0.5 * (lo + hi);
    let best = [0.0, t, 1.0]
        .into_iter()
        .max_by(|a, b| h(*a).total_cmp(&h(*b)))
        .unwrap_or(t);
    Ok((best, h(best)))
}

fn sender_state_values(sender: &PayoffMatrix, f: &[f64]) -> Vec<f64> {
    (0..sender.n_states())
        .map(|w| {
            f.iter()
                .enumerate()
                .map(|(a, p)| p * sender.get(a, w))
                .sum()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sender payoff at `p` from the best optimal receiver strategy.
fn tiebreak_payoff(game: &Game, optimal: &[Vec<f64>], p: &[f64]) -> f64 {
    optimal
        .iter()
        .map(|f| dot(&sender_state_values(&game.sender, f), p))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Exhaustive value at `p`: best sender payoff at `p` over the sets spanned
/// by `p` and up to `max_vertices` points of the value grid.
pub fn brute_force_value(game: &Game, p: &Belief, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    if !(2..=3).contains(&game.n_states()) {
        return Err(Error::validation(
            "brute-force value supports 2 or 3 states",
        ));
    }
    let grid: Vec<Vec<f64>> = simplex_grid(GridSpec::new(cfg.value_grid)?, game.n_states())
        .into_iter()
        .map(|b| b.as_slice().to_vec())
        .collect();
    let required: u64 = (1..=cfg.max_vertices as u64)
        .map(|s| binom(grid.len() as u64, s))
        .sum();
    if required > cfg.budget {
        return Err(Error::BudgetExceeded {
            required: required as u128,
            budget: cfg.budget as u128,
        });
    }
    let p = p.as_slice().to_vec();
    let score = |pts: &[Vec<f64>]| {
        tiebreak_payoff(game, &enumerated_maximin(&game.receiver, pts).optimal, &p)
    };
    let mut best = score(std::slice::from_ref(&p));
    for size in 1..=cfg.max_vertices.min(grid.len()) {
        choose(grid.len(), size, &mut |idx| {
            let mut pts = vec![p.clone()];
            pts.extend(idx.iter().map(|&i| grid[i].clone()));
            best = best.max(score(&pts));
        });
    }
    Ok(best)
}

/// Best ambiguous device found by [`brute_force_device_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceSearch {
    pub value: f64,
    /// `generators[g][state][message]`.
    pub generators: Vec<Vec<Vec<f64>>>,
    pub evaluations: u64,
}

/// One message seen through two generators: the contribution of each
/// optimal receiver strategy to each generator's payoff.
#[derive(Clone, Debug)]
struct PairEntry {
    a: f64,
    b: f64,
    /// `(a_f, b_f)` per optimal receiver strategy when there are several.
    regimes: Vec<(f64, f64)>,
}

struct Table {
    side: usize,
    entries: Vec<Option<PairEntry>>,
    max_a: Vec<f64>,
    max_b: Vec<f64>,
    /// For each first column, second columns ordered by decreasing `a + b`.
    order: Vec<Vec<usize>>,
}

impl Table {
    fn build(game: &Game, k: u32) -> Self {
        let side = (k as usize + 1).pow(2);
        let p0 = game.prior.as_slice();
        let col = |c: usize| ((c / (k as usize + 1)) as f64, (c % (k as usize + 1)) as f64);
        let mut entries = vec![None; side * side];
        for c1 in 0..side {
            for c2 in 0..side {
                let (a1, b1) = col(c1);
                let (a2, b2) = col(c2);
                let zero1 = a1 == 0.0 && b1 == 0.0;
                let zero2 = a2 == 0.0 && b2 == 0.0;
                if zero1 != zero2 {
                    continue;
                }
                if zero1 {
                    entries[c1 * side + c2] = Some(PairEntry {
                        a: 0.0,
                        b: 0.0,
                        regimes: Vec::new(),
                    });
                    continue;
                }
                let joint1 = [p0[0] * a1 / k as f64, p0[1] * b1 / k as f64];
                let joint2 = [p0[0] * a2 / k as f64, p0[1] * b2 / k as f64];
                let post = |j: &[f64; 2]| {
                    let s = j[0] + j[1];
                    vec![j[0] / s, j[1] / s]
                };
                let mut pts = vec![post(&joint1)];
                if c1 != c2 {
                    pts.push(post(&joint2));
                }
                let mm = enumerated_maximin(&game.receiver, &pts);
                let regimes: Vec<(f64, f64)> = mm
                    .optimal
                    .iter()
                    .map(|f| {
                        let s = sender_state_values(&game.sender, f);
                        (dot(&s, &joint1), dot(&s, &joint2))
                    })
                    .collect();
                let a = regimes
                    .iter()
                    .map(|r| r.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                let b = regimes
                    .iter()
                    .map(|r| r.1)
                    .fold(f64::NEG_INFINITY, f64::max);
                entries[c1 * side + c2] = Some(PairEntry {
                    a,
                    b,
                    regimes: if regimes.len() > 1 {
                        regimes
                    } else {
                        Vec::new()
                    },
                });
            }
        }
        let mut max_a = vec![f64::NEG_INFINITY; side];
        let mut max_b = vec![f64::NEG_INFINITY; side];
        let mut order = vec![Vec::new(); side];
        for c1 in 0..side {
            let mut valid: Vec<(usize, f64)> = Vec::new();
            for c2 in 0..side {
                if let Some(e) = &entries[c1 * side + c2] {
                    max_a[c1] = max_a[c1].max(e.a);
                    max_b[c1] = max_b[c1].max(e.b);
                    valid.push((c2, e.a + e.b));
                }
            }
            valid.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            order[c1] = valid.into_iter().map(|(c, _)| c).collect();
        }
        Self {
            side,
            entries,
            max_a,
            max_b,
            order,
        }
    }

    fn get(&self, c1: usize, c2: usize) -> Option<&PairEntry> {
        self.entries[c1 * self.side + c2].as_ref()
    }
}

/// Worst case over the segment between two generators. The payoff is a
/// sum of maxima of linear functions of the mixing weight, hence convex.
fn segment_min(entries: &[&PairEntry]) -> f64 {
    let f = |t: f64| -> f64 {
        entries
            .iter()
            .map(|e| {
                if e.regimes.is_empty() {
                    (1.0 - t) * e.a + t * e.b
                } else {
                    e.regimes
                        .iter()
                        .map(|(x, y)| (1.0 - t) * x + t * y)
                        .fold(f64::NEG_INFINITY, f64::max)
                }
            })
            .sum()
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) > f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.0).min(f(1.0)).min(f(0.5 * (lo + hi)))
}

struct Search<'t> {
    table: &'t Table,
    k: usize,
    budget: u64,
    evaluations: u64,
    best: f64,
    best_pair: Option<(Vec<usize>, Vec<usize>)>,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<()> {
        self.evaluations += 1;
        if self.evaluations > self.budget {
            return Err(Error::BudgetExceeded {
                required: self.evaluations as u128,
                budget: self.budget as u128,
            });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn second(
        &mut self,
        first: &[usize],
        suffix: &[(f64, f64)],
        chosen: &mut Vec<usize>,
        rem: (usize, usize),
        sums: (f64, f64),
    ) -> Result<()> {
        self.tick()?;
        let m = chosen.len();
        if (sums.0 + suffix[m].0).min(sums.1 + suffix[m].1) <= self.best + 1e-12 {
            return Ok(());
        }
        let side = self.k + 1;
        if m + 1 == first.len() {
            let c2 = rem.0 * side + rem.1;
            let Some(e) = self.table.get(first[m], c2) else {
                return Ok(());
            };
            chosen.push(c2);
            let (a, b) = (sums.0 + e.a, sums.1 + e.b);
            let mut value = a.min(b);
            if value > self.best + 1e-12 {
                let entries: Vec<&PairEntry> = first
                    .iter()
                    .zip(chosen.iter())
                    .map(|(&x, &y)| self.table.get(x, y).expect("valid pair"))
                    .collect();
                if entries.iter().any(|e| !e.regimes.is_empty()) {
                    value = value.min(segment_min(&entries));
                }
                if value > self.best + 1e-12 {
                    self.best = value;
                    self.best_pair = Some((first.to_vec(), chosen.clone()));
                }
            }
            chosen.pop();
            return Ok(());
        }
        for idx in 0..self.table.order[first[m]].len() {
            let c2 = self.table.order[first[m]][idx];
            let (a2, b2) = (c2 / side, c2 % side);
            if a2 > rem.0 || b2 > rem.1 {
                continue;
            }
            let e = self
                .table
                .get(first[m], c2)
                .expect("ordered pairs are valid");
            chosen.push(c2);
            self.second(
                first,
                suffix,
                chosen,
                (rem.0 - a2, rem.1 - b2),
                (sums.0 + e.a, sums.1 + e.b),
            )?;
            chosen.pop();
        }
        Ok(())
    }
}

/// Columns of all devices with `messages` messages, as sorted column
/// index lists (message order does not matter for the first generator).
fn sorted_devices(k: usize, messages: usize) -> Vec<Vec<usize>> {
    fn go(
        k: usize,
        left: usize,
        start: usize,
        rem: (usize, usize),
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let side = k + 1;
        if left == 1 {
            let c = rem.0 * side + rem.1;
            if c >= start {
                cur.push(c);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for c in start..side * side {
            let (a, b) = (c / side, c % side);
            if a <= rem.0 && b <= rem.1 {
                cur.push(c);
                go(k, left - 1, c, (rem.0 - a, rem.1 - b), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, messages, 0, (k, k), &mut Vec::new(), &mut out);
    out
}

/// Best worst-case value over ambiguous devices with entries on the
/// `1 / device_steps` grid, at most `max_messages` messages and at most
/// `max_generators` generators, for a two-state game. Each device is scored
/// at its worst point of the generator segment, with the receiver's
/// maximin computed by basis enumeration.
pub fn brute_force_device_search(
    game: &Game,
    prior: &Belief,
    cfg: &OracleConfig,
) -> Result<DeviceSearch> {
    cfg.validate()?;
    if game.n_states() != 2 || prior.dim() != 2 {
        return Err(Error::validation("device search supports two states"));
    }
    let game = game.with_prior(prior.clone())?;
    let k = cfg.device_steps as usize;
    let table = Table::build(&game, cfg.device_steps);
    let mut firsts: Vec<(f64, Vec<usize>)> = sorted_devices(k, cfg.max_messages)
        .into_iter()
        .map(|d| {
            let ua: f64 = d.iter().map(|&c| table.max_a[c]).sum();
            let ub: f64 = d.iter().map(|&c| table.max_b[c]).sum();
            (ua.min(ub), d)
        })
        .collect();
    firsts.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut search = Search {
        table: &table,
        k,
        budget: cfg.budget,
        evaluations: 0,
        best: f64::NEG_INFINITY,
        best_pair: None,
    };
    for (bound, first) in &firsts {
        if *bound <= search.best + 1e-12 {
            break;
        }
        if cfg.max_generators == 1 {
            search.tick()?;
            let v: f64 = first
                .iter()
                .map(|&c| table.get(c, c).expect("diagonal").a)
                .sum();
            if v > search.best + 1e-12 {
                search.best = v;
                search.best_pair = Some((first.clone(), first.clone()));
            }
            continue;
        }
        let mut suffix = vec![(0.0, 0.0); first.len() + 1];
        for m in (0..first.len()).rev() {
            suffix[m] = (
                suffix[m + 1].0 + table.max_a[first[m]],
                suffix[m + 1].1 + table.max_b[first[m]],
            );
        }
        search.second(first, &suffix, &mut Vec::new(), (k, k), (0.0, 0.0))?;
    }
    let (d1, d2) = search
        .best_pair
        .clone()
        .ok_or_else(|| Error::Internal("device search found nothing".into()))?;
    let side = k + 1;
    let rows = |d: &[usize]| -> Vec<Vec<f64>> {
        vec![
            d.iter().map(|&c| (c / side) as f64 / k as f64).collect(),
            d.iter().map(|&c| (c % side) as f64 / k as f64).collect(),
        ]
    };
    let mut generators = vec![rows(&d1)];
    if d1 != d2 {
        generators.push(rows(&d2));
    }
    Ok(DeviceSearch {
        value: search.best,
        generators,
        evaluations: search.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[f64]) -> Belief {
        Belief::new(v.to_vec()).unwrap()
    }

    #[test]
    fn elimination_solves_small_systems() {
        let x = eliminate(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(eliminate(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn matching_pennies_maximin() {
        let u = PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = enumerated_maximin(&u, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((m.value - 0.5).abs() < 1e-12);
        assert_eq!(m.optimal.len(), 1);
        assert!((m.optimal[0][0] - 0.5).abs() < 1e-12);
        let (t, v) = ternary_maximin(&u, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((t - 0.5).abs() < 1e-9 && (v - 0.5).abs() < 1e-9);
    }

    #[test]
    fn indifference_keeps_every_extreme_strategy() {
        let u = PayoffMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = enumerated_maximin(&u, &[vec![0.5, 0.5]]);
        assert!((m.value - 0.5).abs() < 1e-12);
        assert_eq!(m.optimal.len(), 2);
    }

    #[test]
    fn prosecutor_values() {
        let g = Game::prosecutor(0.3).unwrap();
        let cfg = OracleConfig::default();
        assert!((brute_force_value(&g, &b(&[0.7, 0.3]), &cfg).unwrap() - 0.5).abs() < 1e-9);
        assert!((brute_force_value(&g, &b(&[0.5, 0.5]), &cfg).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn restricted_device_searches() {
        let g = Game::prosecutor(0.3).unwrap();
        // the optimal Bayesian device sends the conviction message from the
        // innocent state with probability 3/7
        let single = OracleConfig {
            max_generators: 1,
            device_steps: 7,
            ..OracleConfig::default()
        };
        let r = brute_force_device_search(&g, &g.prior, &single).unwrap();
        assert!((r.value - 0.6).abs() < 1e-9);
        let coarse = OracleConfig {
            max_generators: 1,
            ..OracleConfig::default()
        };
        let r = brute_force_device_search(&g, &g.prior, &coarse).unwrap();
        assert!((r.value - 0.58).abs() < 1e-9);
        let silent = OracleConfig {
            max_messages: 1,
            ..OracleConfig::default()
        };
        assert!(
            brute_force_device_search(&g, &g.prior, &silent)
                .unwrap()
                .value
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn budget_is_enforced() {
        let g = Game::prosecutor(0.3).unwrap();
        let tiny = OracleConfig {
            budget: 10,
            ..OracleConfig::default()
        };
        assert!(matches!(
            brute_force_device_search(&g, &g.prior, &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            brute_force_value(&g, &g.prior, &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
