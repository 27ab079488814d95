//! Sender's pointwise value functions: the Bayesian baseline and the
//! ambiguous value obtained by letting the receiver hold a belief set that
//! contains the evaluation belief.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::belief::{simplex_grid, Belief, BeliefSet, Game, GridSpec, MixedAction};
use crate::error::{check_dim, Error, Result};
use crate::meu::{expected_payoff, meu_best_response, MeuResponse};

/// Values closer than this are treated as ties when choosing a maximizer.
const VALUE_TIE_TOL: f64 = 1e-12;

/// Candidate belief sets searched for the ambiguous value at `p`: `{p}` plus
/// `conv({p} ∪ S)` for every subset `S` of the search grid with
/// `1 <= |S| <= k_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateConfig {
    pub grid: GridSpec,
    pub k_max: usize,
    /// Keep only sets with `p` in their relative interior. Such sets can
    /// always be realized by dilating a message whose posterior is `p`.
    #[serde(default)]
    pub interior_only: bool,
}

impl CandidateConfig {
    pub fn new(grid: GridSpec, k_max: usize) -> Self {
        Self {
            grid,
            k_max,
            interior_only: false,
        }
    }

    pub fn interior(self) -> Self {
        Self {
            interior_only: true,
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueSample {
    pub belief: Belief,
    /// Ambiguous value `v(p)`.
    pub v: f64,
    /// Maximizing set.
    pub argmax_set: BeliefSet,
    /// Receiver strategy the sender gets at the maximizer.
    pub strategy: MixedAction,
    /// Bayesian value `v_BP(p)`.
    pub v_bp: f64,
    /// Distinct candidate sets evaluated.
    pub candidates: usize,
}

/// Sender payoff at `p` when the receiver best-responds to `p` alone and
/// breaks ties in the sender's favour.
pub fn bayesian_value(game: &Game, p: &Belief) -> Result<f64> {
    check_dim(game.n_states(), p.dim())?;
    let resp = meu_best_response(game, &BeliefSet::singleton(p.clone()))?;
    let f = resp.tiebreak(game, p)?;
    expected_payoff(&game.sender, &f, p)
}

/// Reusable search state: grid points and memoized maximin responses.
struct Searcher<'g> {
    game: &'g Game,
    cfg: CandidateConfig,
    grid: Vec<Belief>,
    responses: HashMap<Vec<u64>, MeuResponse>,
}

impl<'g> Searcher<'g> {
    fn new(game: &'g Game, cfg: CandidateConfig) -> Result<Self> {
        if cfg.grid.resolution == 0 {
            return Err(Error::validation(
                "candidate grid resolution must be positive",
            ));
        }
        Ok(Self {
            game,
            cfg,
            grid: simplex_grid(cfg.grid, game.n_states()),
            responses: HashMap::new(),
        })
    }

    fn response(&mut self, set: &BeliefSet) -> Result<&MeuResponse> {
        let key = set.dedup_key();
        if !self.responses.contains_key(&key) {
            let r = meu_best_response(self.game, set)?;
            self.responses.insert(key.clone(), r);
        }
        Ok(&self.responses[&key])
    }

    fn sample(&mut self, p: &Belief) -> Result<ValueSample> {
        let game = self.game;
        check_dim(game.n_states(), p.dim())?;
        let singleton = BeliefSet::singleton(p.clone());
        let f = self.response(&singleton)?.tiebreak(game, p)?;
        let v_bp = expected_payoff(&game.sender, &f, p)?;

        let mut best = (v_bp, singleton, f);
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        seen.insert(best.1.dedup_key());
        let grid = self.grid.clone();
        for size in 1..=self.cfg.k_max.min(grid.len()) {
            for subset in grid.iter().combinations(size) {
                let mut pts: Vec<Belief> = Vec::with_capacity(size + 1);
                pts.push(p.clone());
                pts.extend(subset.into_iter().cloned());
                let set = BeliefSet::new(pts)?;
                if !seen.insert(set.dedup_key()) {
                    continue;
                }
                if self.cfg.interior_only && !set.in_relative_interior(p)? {
                    continue;
                }
                let f = self.response(&set)?.tiebreak(game, p)?;
                let v = expected_payoff(&game.sender, &f, p)?;
                let better = v > best.0 + VALUE_TIE_TOL
                    || (v >= best.0 - VALUE_TIE_TOL
                        && set.preference_cmp(&best.1) == Ordering::Less);
                if better {
                    best = (v, set, f);
                }
            }
        }
        Ok(ValueSample {
            belief: p.clone(),
            v: best.0,
            argmax_set: best.1,
            strategy: best.2,
            v_bp,
            candidates: seen.len(),
        })
    }
}

/// Ambiguous value at `p`: the best sender payoff at `p` over candidate
/// sets containing `p`, with the receiver playing the sender-preferred
/// maximin strategy. Ties go to the set with fewest vertices, then the
/// lexicographically smallest one.
pub fn ambiguous_value(game: &Game, p: &Belief, cfg: &CandidateConfig) -> Result<ValueSample> {
    Searcher::new(game, *cfg)?.sample(p)
}

/// [`ambiguous_value`] at every point of the `spec` grid, in grid order.
pub fn value_grid(game: &Game, spec: GridSpec, cfg: &CandidateConfig) -> Result<Vec<ValueSample>> {
    let mut searcher = Searcher::new(game, *cfg)?;
    simplex_grid(spec, game.n_states())
        .iter()
        .map(|p| searcher.sample(p))
        .collect()
}
