//! Concavification: the value of ambiguous persuasion as the concave
//! closure of the pointwise value function, computed on a grid, together
//! with the device that attains it.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::belief::{simplex_grid, Belief, BeliefSet, Game, GridSpec, MixedAction};
use crate::device::{build_device_from_vbp, evaluate_device, sender_value, AmbiguousDevice};
use crate::error::{check_dim, Error, Result};
use crate::lp::{lp_solve, solve_count, LinearProgram, LpStatus, Relation};
use crate::meu::meu_best_response;
use crate::value::{bayesian_value, value_grid, CandidateConfig, ValueSample};
use crate::vbp::{extreme_selection, verify_vbp, Selection, SetDistribution};

/// Weights below this are dropped from a reported distribution.
const SUPPORT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedBelief {
    pub belief: Belief,
    pub weight: f64,
    /// Index into the sample list the closure was computed from.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub value: f64,
    pub tau: Vec<WeightedBelief>,
}

/// Concave closure of the sampled function at `p0`:
/// `max sum_i t_i v_i` over distributions `t` on the samples averaging to `p0`.
/// The returned distribution is a basic solution, so it has at most
/// `|states| + 1` support points.
pub fn concave_closure_at(samples: &[(Belief, f64)], p0: &Belief) -> Result<Closure> {
    if samples.is_empty() {
        return Err(Error::validation(
            "concave closure needs at least one sample",
        ));
    }
    let n = samples.len();
    let mut lp = LinearProgram::maximize(samples.iter().map(|(_, v)| *v).collect());
    lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0);
    for w in 0..p0.dim() {
        let mut row = Vec::with_capacity(n);
        for (g, _) in samples {
            check_dim(p0.dim(), g.dim())?;
            row.push(g.get(w));
        }
        lp.add_constraint(row, Relation::Eq, p0.get(w));
    }
    let res = lp_solve(&lp)?;
    match res.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Infeasible(format!(
                "{p0} is outside the hull of the sample beliefs"
            )))
        }
        LpStatus::Unbounded => return Err(Error::Internal("concave closure LP unbounded".into())),
    }
    let tau = res
        .solution
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > SUPPORT_TOL)
        .map(|(i, &t)| WeightedBelief {
            belief: samples[i].0.clone(),
            weight: t,
            index: i,
        })
        .collect();
    Ok(Closure {
        value: res.value,
        tau,
    })
}

/// Smallest value at `p0` of a linear majorant `h · p` of the samples,
/// with the minimizing `h`. Equal to [`concave_closure_at`] by duality.
pub fn affine_majorant_at(samples: &[(Belief, f64)], p0: &Belief) -> Result<(f64, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::validation(
            "affine majorant needs at least one sample",
        ));
    }
    let n = p0.dim();
    let mut lp = LinearProgram::minimize(p0.as_slice().to_vec());
    for h in 0..n {
        lp.set_free(h);
    }
    for (g, v) in samples {
        check_dim(n, g.dim())?;
        lp.add_constraint(g.as_slice().to_vec(), Relation::Ge, *v);
    }
    let res = lp_solve(&lp)?;
    match res.status {
        LpStatus::Optimal => Ok((res.value, res.solution)),
        LpStatus::Unbounded => Err(Error::Infeasible(format!(
            "{p0} is outside the hull of the sample beliefs"
        ))),
        LpStatus::Infeasible => Err(Error::Internal("affine majorant LP infeasible".into())),
    }
}

/// Bayesian persuasion value on the grid: the concave closure of the
/// Bayesian value function at the prior.
pub fn solve_bayesian_persuasion(game: &Game, spec: GridSpec) -> Result<Closure> {
    let samples = simplex_grid(spec, game.n_states())
        .into_iter()
        .map(|p| bayesian_value(game, &p).map(|v| (p, v)))
        .collect::<Result<Vec<_>>>()?;
    concave_closure_at(&samples, &game.prior)
}

/// One support point of the optimal distribution over posteriors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPlan {
    pub belief: Belief,
    pub weight: f64,
    pub v: f64,
    pub set: BeliefSet,
    pub strategy: MixedAction,
}

/// The device realizing a solution, with its own worst-case value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub device: AmbiguousDevice,
    pub value: f64,
    /// The device attains the reported optimum.
    pub exact: bool,
    pub mu: SetDistribution,
    pub phi: Selection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub grid_points: usize,
    pub candidate_sets: usize,
    pub lp_solves: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersuasionSolution {
    pub value: f64,
    pub tau: Vec<PosteriorPlan>,
    pub bayesian_value: f64,
    pub bayesian_tau: Vec<WeightedBelief>,
    /// Certificate: `mu(P*_p) = tau(p)` with selection `phi(P*_p) = p`.
    pub mu: SetDistribution,
    pub phi: Selection,
    pub construction: Construction,
    pub diagnostics: Diagnostics,
}

fn closure_samples(samples: &[ValueSample], bayesian: bool) -> Vec<(Belief, f64)> {
    samples
        .iter()
        .map(|s| (s.belief.clone(), if bayesian { s.v_bp } else { s.v }))
        .collect()
}

fn certificate(samples: &[ValueSample], closure: &Closure) -> Result<(SetDistribution, Selection)> {
    let mu = SetDistribution::new(
        closure
            .tau
            .iter()
            .map(|t| samples[t.index].argmax_set.clone())
            .collect(),
        closure.tau.iter().map(|t| t.weight).collect(),
    )?;
    let phi = Selection::new(closure.tau.iter().map(|t| t.belief.clone()).collect());
    Ok((mu, phi))
}

/// End-to-end solver: value function on the grid, its concave closure at
/// the prior, the verifiably Bayes plausible certificate, and a device.
///
/// When an optimal posterior sits on the boundary of its set the dilation
/// cannot give every vertex positive probability, and the optimum may be a
/// supremum no device attains. The construction then falls back to sets
/// containing each posterior in their relative interior and reports the
/// value that device actually achieves.
pub fn solve_ambiguous_persuasion(
    game: &Game,
    spec: GridSpec,
    cfg: &CandidateConfig,
) -> Result<PersuasionSolution> {
    let lp_before = solve_count();
    let samples = value_grid(game, spec, cfg)?;
    let closure = concave_closure_at(&closure_samples(&samples, false), &game.prior)?;
    let bayes = concave_closure_at(&closure_samples(&samples, true), &game.prior)?;
    let (mu, phi) = certificate(&samples, &closure)?;

    let construction = match build_device_from_vbp(&mu, &phi, &game.prior) {
        Ok(device) => Construction {
            value: evaluate_device(game, &device)?.value,
            device,
            exact: true,
            mu: mu.clone(),
            phi: phi.clone(),
            note: None,
        },
        Err(e) if e.is_infeasibility() => {
            let interior = value_grid(game, spec, &cfg.interior())?;
            let fallback = concave_closure_at(&closure_samples(&interior, false), &game.prior)?;
            let (fmu, fphi) = certificate(&interior, &fallback)?;
            let device = build_device_from_vbp(&fmu, &fphi, &game.prior)?;
            let value = evaluate_device(game, &device)?.value;
            Construction {
                device,
                value,
                exact: (value - closure.value).abs() <= 2e-6,
                mu: fmu,
                phi: fphi,
                note: Some(format!("optimum not attained by the two-step construction ({e}); device uses interior sets")),
            }
        }
        Err(e) => return Err(e),
    };

    let tau = closure
        .tau
        .iter()
        .map(|t| {
            let s = &samples[t.index];
            PosteriorPlan {
                belief: s.belief.clone(),
                weight: t.weight,
                v: s.v,
                set: s.argmax_set.clone(),
                strategy: s.strategy.clone(),
            }
        })
        .collect();
    Ok(PersuasionSolution {
        value: closure.value,
        tau,
        bayesian_value: bayes.value,
        bayesian_tau: bayes.tau,
        mu,
        phi,
        construction,
        diagnostics: Diagnostics {
            grid_points: samples.len(),
            candidate_sets: samples.iter().map(|s| s.candidates).sum(),
            lp_solves: solve_count() - lp_before,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenderValueMax {
    pub value: f64,
    pub selection: Selection,
    /// All combinations of receiver strategies were searched.
    pub exact: bool,
    pub combinations: u128,
}

/// Default cap on strategy combinations searched by [`sender_value_max`].
pub const EXACT_COMBINATION_LIMIT: u128 = 10_000;

/// Best sender value over all verifying selections of `mu`.
///
/// At each set the sender's payoff is the maximum over the extreme points
/// of the receiver's optimal strategies of a linear function of the pick.
/// Fixing one extreme strategy per set leaves a linear program over the
/// verifying selections, so the maximum is exact once every combination
/// is searched. Beyond `limit` combinations only the first `limit` are
/// tried and the result is a lower bound.
pub fn sender_value_max(
    game: &Game,
    mu: &SetDistribution,
    prior: &Belief,
    limit: u128,
) -> Result<SenderValueMax> {
    check_dim(game.n_states(), prior.dim())?;
    let Some(start) = verify_vbp(mu, prior)? else {
        return Err(Error::NotVbp);
    };
    let game = game.with_prior(prior.clone())?;
    let extremes: Vec<Vec<Vec<f64>>> = mu
        .support()
        .iter()
        .zip(mu.weights())
        .map(|(set, &w)| {
            meu_best_response(&game, set).map(|r| {
                r.optimal_strategy_vertices()
                    .iter()
                    .map(|f| {
                        game.sender
                            .state_values(f)
                            .into_iter()
                            .map(|x| w * x)
                            .collect()
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    let combinations = extremes
        .iter()
        .fold(1u128, |acc, e| acc.saturating_mul(e.len() as u128));

    let mut best = (sender_value(&game, mu, &start)?, start);
    let ranges: Vec<std::ops::Range<usize>> = extremes.iter().map(|e| 0..e.len()).collect();
    for combo in ranges
        .into_iter()
        .multi_cartesian_product()
        .take(limit.min(usize::MAX as u128) as usize)
    {
        let directions: Vec<Vec<f64>> = combo
            .iter()
            .zip(&extremes)
            .map(|(&k, e)| e[k].clone())
            .collect();
        let Some((phi, _)) = extreme_selection(mu, prior, &directions)? else {
            return Err(Error::NotVbp);
        };
        let v = sender_value(&game, mu, &phi)?;
        if v > best.0 + 1e-12 {
            best = (v, phi);
        }
    }
    Ok(SenderValueMax {
        value: best.0,
        selection: best.1,
        exact: combinations <= limit,
        combinations,
    })
}
