#![allow(dead_code)]

use ambiguous_persuasion::belief::{Belief, BeliefSet, Game};
use ambiguous_persuasion::device::Device;
use ambiguous_persuasion::vbp::{Selection, SetDistribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn b(v: &[f64]) -> Belief {
    Belief::new(v.to_vec()).unwrap()
}

pub fn set(vs: &[&[f64]]) -> BeliefSet {
    BeliefSet::new(vs.iter().map(|v| b(v)).collect()).unwrap()
}

/// Belief with every coordinate at least `floor`.
pub fn dense_belief(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Belief {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let scale = 1.0 - floor * n as f64;
    Belief::new(raw.iter().map(|x| floor + scale * x / total).collect()).unwrap()
}

pub fn payoffs(rng: &mut ChaCha8Rng, actions: usize, states: usize) -> Vec<Vec<f64>> {
    (0..actions)
        .map(|_| (0..states).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

pub fn random_game(rng: &mut ChaCha8Rng, states: usize, actions: usize) -> Game {
    let prior = dense_belief(rng, states, 0.1);
    let us = payoffs(rng, actions, states);
    let ur = payoffs(rng, actions, states);
    Game::from_matrices(prior, us, ur).unwrap()
}

pub fn random_device(rng: &mut ChaCha8Rng, states: usize, messages: usize) -> Device {
    Device::new(
        (0..states)
            .map(|_| dense_belief(rng, messages, 0.02).as_slice().to_vec())
            .collect(),
    )
    .unwrap()
}

/// Set containing `q` in its relative interior: `q` plus spread-out
/// offsets that average to zero.
pub fn set_around(rng: &mut ChaCha8Rng, q: &Belief, vertices: usize) -> BeliefSet {
    let n = q.dim();
    let dirs: Vec<Vec<f64>> = (0..vertices)
        .map(|_| dense_belief(rng, n, 0.0).as_slice().to_vec())
        .collect();
    let center: Vec<f64> = (0..n)
        .map(|w| dirs.iter().map(|d| d[w]).sum::<f64>() / vertices as f64)
        .collect();
    let offsets: Vec<Vec<f64>> = dirs
        .iter()
        .map(|d| d.iter().zip(&center).map(|(x, c)| x - c).collect())
        .collect();
    let mut s: f64 = 1.0;
    for o in &offsets {
        for w in 0..n {
            if o[w] < 0.0 {
                s = s.min(0.9 * q.get(w) / -o[w]);
            }
        }
    }
    let pts = offsets
        .iter()
        .map(|o| Belief::new((0..n).map(|w| (q.get(w) + s * o[w]).max(0.0)).collect()).unwrap())
        .collect();
    BeliefSet::new(pts).unwrap()
}

/// Verifiably Bayes plausible `(mu, phi, prior)`: random picks and weights
/// define the prior; each set contains its pick, in the relative interior
/// when `interior` holds.
pub fn random_vbp(
    rng: &mut ChaCha8Rng,
    states: usize,
    sets: usize,
    interior: bool,
) -> (SetDistribution, Selection, Belief) {
    let picks: Vec<Belief> = (0..sets).map(|_| dense_belief(rng, states, 0.05)).collect();
    let weights = dense_belief(rng, sets, 0.05).as_slice().to_vec();
    let prior = Belief::new(
        (0..states)
            .map(|w| picks.iter().zip(&weights).map(|(p, x)| x * p.get(w)).sum())
            .collect(),
    )
    .unwrap();
    let support = picks
        .iter()
        .map(|q| {
            let k = rng.gen_range(1..=3usize);
            if k == 1 {
                BeliefSet::singleton(q.clone())
            } else if interior {
                set_around(rng, q, k)
            } else {
                let mut pts = vec![q.clone()];
                pts.extend((1..k).map(|_| dense_belief(rng, states, 0.0)));
                BeliefSet::new(pts).unwrap()
            }
        })
        .collect();
    (
        SetDistribution::new(support, weights).unwrap(),
        Selection::new(picks),
        prior,
    )
}

/// Fully verified distribution: the sets induced by a simple device whose
/// generators perturb common posteriors in directions that cancel under
/// the marginals.
pub fn random_fully_verified(
    rng: &mut ChaCha8Rng,
    states: usize,
    messages: usize,
    generators: usize,
) -> (SetDistribution, Belief) {
    let base: Vec<Belief> = (0..messages)
        .map(|_| dense_belief(rng, states, 0.1))
        .collect();
    let tau = dense_belief(rng, messages, 0.1).as_slice().to_vec();
    let prior = Belief::new(
        (0..states)
            .map(|w| base.iter().zip(&tau).map(|(q, t)| t * q.get(w)).sum())
            .collect(),
    )
    .unwrap();
    let mut points: Vec<Vec<Belief>> = vec![Vec::new(); messages];
    for _ in 0..generators {
        // zero-sum offsets per message, then remove the tau-weighted mean
        let mut d: Vec<Vec<f64>> = (0..messages)
            .map(|_| {
                let r: Vec<f64> = (0..states).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mean = r.iter().sum::<f64>() / states as f64;
                r.into_iter().map(|x| x - mean).collect()
            })
            .collect();
        for w in 0..states {
            let avg: f64 = d.iter().zip(&tau).map(|(x, t)| t * x[w]).sum();
            for row in d.iter_mut() {
                row[w] -= avg;
            }
        }
        let mut s: f64 = 1.0;
        for (q, row) in base.iter().zip(&d) {
            for w in 0..states {
                if row[w] < 0.0 {
                    s = s.min(0.9 * q.get(w) / -row[w]);
                }
            }
        }
        for (m, (q, row)) in base.iter().zip(&d).enumerate() {
            points[m]
                .push(Belief::new((0..states).map(|w| q.get(w) + s * row[w]).collect()).unwrap());
        }
    }
    let support = points
        .into_iter()
        .map(|pts| BeliefSet::new(pts).unwrap())
        .collect();
    (SetDistribution::new(support, tau).unwrap(), prior)
}
