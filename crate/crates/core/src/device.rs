//! Probabilistic and ambiguous devices.
//!
//! An ambiguous device is stored as a finite list of generator devices over
//! a shared message list and stands for their convex hull. At a fixed
//! message the Bayes map is linear-fractional in the device, so the
//! posteriors of the hull are exactly the hull of the generator posteriors.
//!
//! Any verifiably Bayes plausible `(mu, phi)` is realized in two steps: a
//! simple device sends one message per support set with the selected
//! posterior, then each message is split into sub-messages whose posteriors
//! are the vertices of the target set, and the sub-message labels are
//! rotated across generators so every sub-message sees the whole set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{bayes_update, Belief, BeliefSet, Game, FEASIBILITY_TOL, NORMALIZATION_TOL};
use crate::error::{check_dim, Error, Result};
use crate::meu::{expected_payoff, meu_best_response, MeuResponse};
use crate::vbp::{is_fully_verified, verify_vbp_pinned, Selection, SetDistribution};

/// Row-stochastic map from states to messages: `rows[state][message]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Device {
    rows: Vec<Vec<f64>>,
}

impl Device {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::validation("device needs at least one state"));
        };
        let m = first.len();
        if m == 0 {
            return Err(Error::validation("device needs at least one message"));
        }
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            check_dim(m, r.len())?;
            if r.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::validation(
                    "device probabilities must be nonnegative",
                ));
            }
            let total: f64 = r.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!(
                    "device row sums to {total}, not 1"
                )));
            }
            out.push(r.into_iter().map(|x| x / total).collect());
        }
        Ok(Self { rows: out })
    }

    /// Every state sends message `0`.
    pub fn uninformative(n_states: usize) -> Self {
        Self {
            rows: vec![vec![1.0]; n_states],
        }
    }

    /// State `w` sends message `w`.
    pub fn fully_revealing(n_states: usize) -> Self {
        Self {
            rows: (0..n_states)
                .map(|w| {
                    let mut r = vec![0.0; n_states];
                    r[w] = 1.0;
                    r
                })
                .collect(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn n_messages(&self) -> usize {
        self.rows[0].len()
    }

    pub fn prob(&self, message: usize, state: usize) -> f64 {
        self.rows[state][message]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `pi(m | .)` as a vector over states.
    pub fn likelihood(&self, message: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[message]).collect()
    }

    fn sends(&self, message: usize) -> bool {
        self.rows.iter().any(|r| r[message] > 0.0)
    }

    /// Convex combination `sum_k alpha[k] * devices[k]`.
    pub fn mixture(devices: &[Device], alpha: &[f64]) -> Result<Device> {
        check_dim(devices.len(), alpha.len())?;
        let mut rows = vec![vec![0.0; devices[0].n_messages()]; devices[0].n_states()];
        for (d, &a) in devices.iter().zip(alpha) {
            for (r, dr) in rows.iter_mut().zip(&d.rows) {
                for (x, y) in r.iter_mut().zip(dr) {
                    *x += a * y;
                }
            }
        }
        Device::new(rows)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Device {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Device::new(rows)
    }
}

impl From<Device> for Vec<Vec<f64>> {
    fn from(d: Device) -> Self {
        d.rows
    }
}

/// `tau_pi(m) = sum_w prior(w) pi(m | w)`.
pub fn marginal(pi: &Device, prior: &Belief) -> Result<Vec<f64>> {
    check_dim(pi.n_states(), prior.dim())?;
    Ok((0..pi.n_messages())
        .map(|m| prior.dot(&pi.likelihood(m)))
        .collect())
}

/// Posterior after message `m` of device `pi`.
pub fn device_posterior(pi: &Device, prior: &Belief, m: usize) -> Result<Belief> {
    bayes_update(prior, &pi.likelihood(m))
}

/// A finite generator list standing for its convex hull. All generators
/// send the same set of messages with positive probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAmbiguousDevice")]
pub struct AmbiguousDevice {
    messages: Vec<String>,
    generators: Vec<Device>,
}

#[derive(Deserialize)]
struct RawAmbiguousDevice {
    messages: Vec<String>,
    generators: Vec<Device>,
}

impl TryFrom<RawAmbiguousDevice> for AmbiguousDevice {
    type Error = Error;
    fn try_from(raw: RawAmbiguousDevice) -> Result<Self> {
        AmbiguousDevice::new(raw.messages, raw.generators)
    }
}

impl AmbiguousDevice {
    pub fn new(messages: Vec<String>, generators: Vec<Device>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::validation(
                "ambiguous device needs at least one generator",
            ));
        };
        check_dim(messages.len(), first.n_messages())?;
        for g in &generators {
            check_dim(first.n_states(), g.n_states())?;
            check_dim(first.n_messages(), g.n_messages())?;
        }
        // The prior has full support, so tau_pi(m) > 0 iff some state sends m.
        for m in 0..first.n_messages() {
            let sent = first.sends(m);
            if generators.iter().any(|g| g.sends(m) != sent) {
                return Err(Error::validation(format!(
                    "message {} violates the common-support condition",
                    messages[m]
                )));
            }
        }
        Ok(Self {
            messages,
            generators,
        })
    }

    /// A single (Bayesian) device with messages named `m1, m2, ...`.
    pub fn single(device: Device) -> Self {
        let messages = (1..=device.n_messages()).map(|i| format!("m{i}")).collect();
        Self {
            messages,
            generators: vec![device],
        }
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn generators(&self) -> &[Device] {
        &self.generators
    }

    pub fn n_messages(&self) -> usize {
        self.messages.len()
    }

    pub fn n_states(&self) -> usize {
        self.generators[0].n_states()
    }

    /// Messages sent with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_messages())
            .filter(|&m| self.generators[0].sends(m))
            .collect()
    }
}

/// Probability-possibility set at message `m`: the posteriors of every
/// device in the hull.
pub fn posterior_set(pi: &AmbiguousDevice, prior: &Belief, m: usize) -> Result<BeliefSet> {
    check_dim(pi.n_states(), prior.dim())?;
    if m >= pi.n_messages() || !pi.generators[0].sends(m) {
        return Err(Error::MessageOutsideSupport(m));
    }
    let posts = pi
        .generators
        .iter()
        .map(|g| device_posterior(g, prior, m))
        .collect::<Result<Vec<_>>>()?;
    BeliefSet::new(posts)
}

/// All generators send each message with the same overall probability.
pub fn is_simple(pi: &AmbiguousDevice, prior: &Belief) -> Result<bool> {
    let base = marginal(&pi.generators[0], prior)?;
    for g in &pi.generators[1..] {
        let tau = marginal(g, prior)?;
        if tau
            .iter()
            .zip(&base)
            .any(|(a, b)| (a - b).abs() > NORMALIZATION_TOL)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The distribution over probability-possibility sets induced by a simple
/// device, one entry per supported message, with one verifying selection per
/// generator. Messages inducing the same set stay separate entries: merging
/// them would average the picks and lose full verification.
pub fn induced_distribution(
    pi: &AmbiguousDevice,
    prior: &Belief,
) -> Result<(SetDistribution, Vec<Selection>)> {
    if !is_simple(pi, prior)? {
        return Err(Error::NonSimpleDevice);
    }
    let tau = marginal(&pi.generators[0], prior)?;
    let support = pi.support();
    let sets = support
        .iter()
        .map(|&m| posterior_set(pi, prior, m))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = support.iter().map(|&m| tau[m]).sum();
    let weights = support.iter().map(|&m| tau[m] / total).collect();
    let selections = pi
        .generators
        .iter()
        .map(|g| {
            support
                .iter()
                .map(|&m| device_posterior(g, prior, m))
                .collect::<Result<Vec<_>>>()
                .map(Selection::new)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((SetDistribution::new(sets, weights)?, selections))
}

/// Generator realizing selection `phi`: `pi(m_P | w) = mu(P) phi(P)(w) / prior(w)`.
fn selection_device(mu: &SetDistribution, phi: &Selection, prior: &Belief) -> Result<Device> {
    let rows = (0..prior.dim())
        .map(|w| {
            mu.weights()
                .iter()
                .zip(phi.picks())
                .map(|(mw, q)| mw * q.get(w) / prior.get(w))
                .collect::<Vec<f64>>()
        })
        .map(|r| {
            let total: f64 = r.iter().sum();
            r.into_iter().map(|x| x / total).collect()
        })
        .collect();
    Device::new(rows)
}

fn base_messages(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("m{i}")).collect()
}

/// A simple device inducing the fully verified distribution `mu`: one
/// message per support set and one generator per (set, vertex) pair, built
/// from a verifying selection that picks that vertex.
pub fn simple_device_from_distribution(
    mu: &SetDistribution,
    prior: &Belief,
) -> Result<AmbiguousDevice> {
    if !prior.has_full_support() {
        return Err(Error::validation("prior must have full support"));
    }
    if mu.weights().iter().any(|&w| w <= 0.0) {
        return Err(Error::validation("support sets must carry positive weight"));
    }
    if !is_fully_verified(mu, prior)? {
        return Err(Error::NotFullyVerified);
    }
    let mut generators: Vec<Device> = Vec::new();
    for (i, set) in mu.support().iter().enumerate() {
        for v in set.vertices() {
            let phi = verify_vbp_pinned(mu, prior, &[(i, v)])?.ok_or(Error::NotFullyVerified)?;
            let d = selection_device(mu, &phi, prior)?;
            if !generators.iter().any(|g| same_device(g, &d)) {
                generators.push(d);
            }
        }
    }
    AmbiguousDevice::new(base_messages(mu.len()), generators)
}

fn same_device(a: &Device, b: &Device) -> bool {
    a.rows.iter().zip(&b.rows).all(|(x, y)| {
        x.iter()
            .zip(y)
            .all(|(u, v)| (u - v).abs() <= NORMALIZATION_TOL)
    })
}

/// Split of one parent message into sub-messages:
/// `probs[i][w] = g(sub_i | parent, w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationMap {
    pub parent: usize,
    /// Posterior each sub-message induces.
    pub targets: Vec<Belief>,
    /// Conditional probability of each sub-message given the parent.
    pub weights: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
}

impl DilationMap {
    /// One sub-message that repeats the parent.
    pub fn identity(parent: usize, posterior: Belief) -> Self {
        let n = posterior.dim();
        Self {
            parent,
            targets: vec![posterior],
            weights: vec![1.0],
            probs: vec![vec![1.0; n]],
        }
    }

    pub fn n_sub(&self) -> usize {
        self.probs.len()
    }

    /// `g(sub | parent, w)` for every sub-message.
    pub fn column(&self, state: usize) -> Vec<f64> {
        self.probs.iter().map(|r| r[state]).collect()
    }
}

/// Splits message `m` of `pi` so that the sub-message posteriors are the
/// vertices of `target`, whose convex weights reproduce the parent
/// posterior (conditional Bayes plausibility).
pub fn dilate(pi: &Device, prior: &Belief, m: usize, target: &BeliefSet) -> Result<DilationMap> {
    check_dim(pi.n_states(), target.dim())?;
    if m >= pi.n_messages() {
        return Err(Error::MessageOutsideSupport(m));
    }
    let q = device_posterior(pi, prior, m)?;
    let Some(lambda) = target.interior_weights(&q)? else {
        return Err(Error::Infeasible(format!(
            "posterior {q} is not in target set {target}"
        )));
    };
    let target_rows = || {
        target
            .vertices()
            .iter()
            .map(|v| v.as_slice().to_vec())
            .collect()
    };
    for v in target.vertices() {
        for w in 0..q.dim() {
            if q.get(w) <= 0.0 && v.get(w) > 0.0 {
                return Err(Error::UnreachableVertex {
                    posterior: q.as_slice().to_vec(),
                    vertex: v.as_slice().to_vec(),
                    target: target_rows(),
                    state: w,
                });
            }
        }
    }
    let n = q.dim();
    let k = target.n_vertices();
    let mut probs = vec![vec![0.0; n]; k];
    for w in 0..n {
        let col: Vec<f64> = if q.get(w) > 0.0 {
            (0..k)
                .map(|i| lambda[i] * target.vertices()[i].get(w) / q.get(w))
                .collect()
        } else {
            lambda.clone()
        };
        let total: f64 = col.iter().sum();
        for (i, x) in col.into_iter().enumerate() {
            probs[i][w] = x / total;
        }
    }
    Ok(DilationMap {
        parent: m,
        targets: target.vertices().to_vec(),
        weights: lambda,
        probs,
    })
}

/// Relabels sub-messages: sub-message `i` of `g` becomes `sigma[i]`.
pub fn permute_dilation(g: &DilationMap, sigma: &[usize]) -> Result<DilationMap> {
    check_dim(g.n_sub(), sigma.len())?;
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s >= sigma.len() || seen[s] {
            return Err(Error::validation(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    let mut out = g.clone();
    for (i, &s) in sigma.iter().enumerate() {
        out.probs[s] = g.probs[i].clone();
        out.targets[s] = g.targets[i].clone();
        out.weights[s] = g.weights[i];
    }
    Ok(out)
}

/// All relabelings of `g` by permutations of its sub-messages.
pub fn permutation_closure(g: &DilationMap) -> Vec<DilationMap> {
    use itertools::Itertools;
    (0..g.n_sub())
        .permutations(g.n_sub())
        .map(|sigma| permute_dilation(g, &sigma).expect("permutation"))
        .collect()
}

/// `(g ∘ pi)(sub_i | w) = g(sub_i | m, w) pi(m | w)`, with one dilation per
/// message of `pi` in message order. Sub-messages are laid out message by
/// message.
pub fn compose(dilations: &[DilationMap], pi: &Device) -> Result<Device> {
    check_dim(pi.n_messages(), dilations.len())?;
    for (m, g) in dilations.iter().enumerate() {
        if g.parent != m {
            return Err(Error::validation(format!(
                "dilation {m} refines message {}",
                g.parent
            )));
        }
        check_dim(pi.n_states(), g.probs[0].len())?;
    }
    let rows = (0..pi.n_states())
        .map(|w| {
            dilations
                .iter()
                .flat_map(|g| g.probs.iter().map(move |r| r[w] * pi.prob(g.parent, w)))
                .collect::<Vec<f64>>()
        })
        .collect();
    Device::new(rows)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn sub_message_names(parents: &[String], dilations: &[DilationMap]) -> Vec<String> {
    dilations
        .iter()
        .flat_map(|g| (1..=g.n_sub()).map(move |i| format!("{}.{i}", parents[g.parent])))
        .collect()
}

/// Ambiguous device inducing `(mu, phi)`: a simple device sending `phi(P)`
/// at message `m_P`, with each message dilated onto the vertices of `P` and
/// the sub-message labels rotated across generators.
///
/// Fails when a selected posterior sits on the relative boundary of its
/// set (some sub-message would be sent by only part of the generators), or
/// when a vertex needs mass on a state the posterior rules out.
pub fn build_device_from_vbp(
    mu: &SetDistribution,
    phi: &Selection,
    prior: &Belief,
) -> Result<AmbiguousDevice> {
    if !phi.is_verifying(mu, prior, FEASIBILITY_TOL)? {
        return Err(Error::validation(
            "selection does not verify the distribution",
        ));
    }
    // Step one: the singleton distribution {phi(P)} is fully verified.
    let positive: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let singles = SetDistribution::new(
        positive
            .iter()
            .map(|&i| BeliefSet::singleton(phi.picks()[i].clone()))
            .collect(),
        positive.iter().map(|&i| mu.weights()[i]).collect(),
    )?;
    let phi_pos = Selection::new(positive.iter().map(|&i| phi.picks()[i].clone()).collect());
    let simple = AmbiguousDevice::new(
        base_messages(positive.len()),
        vec![selection_device(&singles, &phi_pos, prior)?],
    )?;

    // Step two: dilate every message of every generator onto its target set.
    let mut generators: Vec<Device> = Vec::new();
    let mut names: Option<Vec<String>> = None;
    for base in simple.generators() {
        let dilations = positive
            .iter()
            .enumerate()
            .map(|(m, &i)| dilate(base, prior, m, &mu.support()[i]))
            .collect::<Result<Vec<_>>>()?;
        for (g, &i) in dilations.iter().zip(&positive) {
            if g.n_sub() > 1 && g.weights.iter().any(|&w| w <= FEASIBILITY_TOL) {
                return Err(Error::BoundaryPosterior {
                    posterior: phi.picks()[i].as_slice().to_vec(),
                    target: mu.support()[i]
                        .vertices()
                        .iter()
                        .map(|v| v.as_slice().to_vec())
                        .collect(),
                });
            }
        }
        // lcm-many shifts: each sub-message meets every vertex equally often
        let rotations = dilations.iter().map(DilationMap::n_sub).fold(1, lcm);
        for shift in 0..rotations {
            let rotated = dilations
                .iter()
                .map(|g| {
                    let n = g.n_sub();
                    let sigma: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
                    permute_dilation(g, &sigma)
                })
                .collect::<Result<Vec<_>>>()?;
            let d = compose(&rotated, base)?;
            if !generators.iter().any(|g| same_device(g, &d)) {
                generators.push(d);
            }
        }
        names.get_or_insert_with(|| sub_message_names(simple.messages(), &dilations));
    }
    let device = AmbiguousDevice::new(names.unwrap_or_default(), generators)?;

    // Every sub-message of m_P must carry the whole set P.
    let mut col = 0;
    for &i in &positive {
        let target = &mu.support()[i];
        for _ in 0..target.n_vertices() {
            let got = posterior_set(&device, prior, col)?;
            if !got.same_set(target)? {
                return Err(Error::Internal(format!(
                    "sub-message {} induces {got}, expected {target}",
                    device.messages()[col]
                )));
            }
            col += 1;
        }
    }
    Ok(device)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceEvaluation {
    /// Worst-case ex-ante sender payoff.
    pub value: f64,
    /// The device in the hull attaining `value`.
    pub minimizer: Device,
    /// Index of the generator attaining the minimum over generators.
    pub minimizing_generator: usize,
    pub generator_values: Vec<f64>,
    /// Smallest value among mixtures of generators (the uniform mixture
    /// and any sampled ones), if there is more than one generator.
    pub mixture_min: Option<f64>,
    /// Generator minimum minus the overall minimum.
    pub gap: f64,
}

/// Receiver response at every supported message: the probability-possibility
/// set and its maximin response.
fn message_responses(game: &Game, pi: &AmbiguousDevice) -> Result<Vec<Option<MeuResponse>>> {
    let prior = &game.prior;
    let supported = pi.support();
    (0..pi.n_messages())
        .map(|m| {
            if !supported.contains(&m) {
                return Ok(None);
            }
            let set = posterior_set(pi, prior, m)?;
            meu_best_response(game, &set).map(Some)
        })
        .collect()
}

fn device_value(game: &Game, d: &Device, responses: &[Option<MeuResponse>]) -> Result<f64> {
    let tau = marginal(d, &game.prior)?;
    let mut total = 0.0;
    for (m, r) in responses.iter().enumerate() {
        let Some(resp) = r else { continue };
        if tau[m] <= 0.0 {
            continue;
        }
        let q = device_posterior(d, &game.prior, m)?;
        let f = resp.tiebreak(game, &q)?;
        total += tau[m] * expected_payoff(&game.sender, &f, &q)?;
    }
    Ok(total)
}

/// Worst case over the hull of the sender's ex-ante payoff, with the
/// receiver playing the sender-preferred maximin strategy against the
/// probability-possibility set and outcomes evaluated at each device's own
/// posterior. Candidates are the generators and their uniform mixture.
pub fn evaluate_device(game: &Game, pi: &AmbiguousDevice) -> Result<DeviceEvaluation> {
    evaluate_device_refined(game, pi, 0, 0)
}

/// [`evaluate_device`] with `n_mixtures` random convex mixtures of the
/// generators added to the candidates.
pub fn evaluate_device_refined(
    game: &Game,
    pi: &AmbiguousDevice,
    n_mixtures: usize,
    seed: u64,
) -> Result<DeviceEvaluation> {
    check_dim(game.n_states(), pi.n_states())?;
    let responses = message_responses(game, pi)?;
    let generator_values = pi
        .generators()
        .iter()
        .map(|g| device_value(game, g, &responses))
        .collect::<Result<Vec<f64>>>()?;
    let (minimizing_generator, gen_min) =
        generator_values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    let mut minimizer = pi.generators()[minimizing_generator].clone();
    let mut value = gen_min;

    let mut mixture_min = None;
    let k = pi.generators().len();
    if k > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lowest = f64::INFINITY;
        for s in 0..=n_mixtures {
            let alpha: Vec<f64> = if s == 0 {
                vec![1.0 / k as f64; k]
            } else {
                let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / total).collect()
            };
            let mix = Device::mixture(pi.generators(), &alpha)?;
            let v = device_value(game, &mix, &responses)?;
            lowest = lowest.min(v);
            if v < value - 1e-12 {
                value = v;
                minimizer = mix;
            }
        }
        mixture_min = Some(lowest);
    }
    Ok(DeviceEvaluation {
        value,
        minimizer,
        minimizing_generator,
        generator_values,
        mixture_min,
        gap: gen_min - value,
    })
}

/// `V_S(mu, phi)`: expected sender payoff when the receiver holds set `P`
/// and outcomes at `P` are evaluated at `phi(P)`.
pub fn sender_value(game: &Game, mu: &SetDistribution, phi: &Selection) -> Result<f64> {
    if !phi.is_verifying(mu, &game.prior, FEASIBILITY_TOL)? {
        return Err(Error::validation(
            "selection does not verify the distribution",
        ));
    }
    let mut total = 0.0;
    for ((set, &w), q) in mu.support().iter().zip(mu.weights()).zip(phi.picks()) {
        if w == 0.0 {
            continue;
        }
        let f = meu_best_response(game, set)?.tiebreak(game, q)?;
        total += w * expected_payoff(&game.sender, &f, q)?;
    }
    Ok(total)
}

/// Distribution and selection read off the minimizing device:
/// `mu(P_m) = tau(m)` and `phi(P_m) = q_m`, one entry per supported message.
pub fn minimizer_distribution(
    game: &Game,
    pi: &AmbiguousDevice,
) -> Result<(SetDistribution, Selection)> {
    let eval = evaluate_device(game, pi)?;
    let d = &eval.minimizer;
    let tau = marginal(d, &game.prior)?;
    let mut sets = Vec::new();
    let mut weights = Vec::new();
    let mut picks = Vec::new();
    for m in pi.support() {
        sets.push(posterior_set(pi, &game.prior, m)?);
        weights.push(tau[m]);
        picks.push(device_posterior(d, &game.prior, m)?);
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Ok((SetDistribution::new(sets, weights)?, Selection::new(picks)))
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
    fn marginal_examples() {
        let prior = b(&[0.3, 0.7]);
        let unin = Device::new(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        let tau = marginal(&unin, &prior).unwrap();
        assert!((tau[0] - 0.4).abs() < 1e-15 && (tau[1] - 0.6).abs() < 1e-15);
        let tau = marginal(&Device::fully_revealing(2), &prior).unwrap();
        assert_eq!(tau, vec![0.3, 0.7]);
        let d = Device::new(vec![vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let tau = marginal(&d, &b(&[0.5, 0.5])).unwrap();
        assert!((tau[0] - 0.35).abs() < 1e-15 && (tau[1] - 0.65).abs() < 1e-15);
    }

    #[test]
    fn posterior_set_examples() {
        let prior = b(&[0.5, 0.5]);
        let single = AmbiguousDevice::single(Device::fully_revealing(2));
        assert!(posterior_set(&single, &prior, 0).unwrap().is_singleton());
        // message 0 leads to (0.2, 0.8) under one generator, (0.8, 0.2) under the other
        let g1 = Device::new(vec![vec![0.2, 0.8], vec![0.8, 0.2]]).unwrap();
        let g2 = Device::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let amb = AmbiguousDevice::new(vec!["a".into(), "b".into()], vec![g1, g2]).unwrap();
        let p = posterior_set(&amb, &prior, 0).unwrap();
        assert!(p.same_set(&set(&[&[0.2, 0.8], &[0.8, 0.2]])).unwrap());
        let unin = AmbiguousDevice::new(
            vec!["a".into(), "b".into()],
            vec![
                Device::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap(),
                Device::new(vec![vec![0.6, 0.4], vec![0.6, 0.4]]).unwrap(),
            ],
        )
        .unwrap();
        let p = posterior_set(&unin, &prior, 1).unwrap();
        assert!(p.is_singleton() && p.vertices()[0].distance_inf(&prior) < 1e-15);
        assert_eq!(
            posterior_set(&unin, &prior, 5),
            Err(Error::MessageOutsideSupport(5))
        );
    }

    #[test]
    fn common_support_enforced() {
        let g1 = Device::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let g2 = Device::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!(AmbiguousDevice::new(vec!["a".into(), "b".into()], vec![g1, g2]).is_err());
    }

    #[test]
    fn simplicity() {
        let prior = b(&[0.5, 0.5]);
        assert!(is_simple(&AmbiguousDevice::single(Device::fully_revealing(2)), &prior).unwrap());
        let g1 = Device::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let g2 = Device::new(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        let amb = AmbiguousDevice::new(vec!["a".into(), "b".into()], vec![g1, g2]).unwrap();
        assert!(!is_simple(&amb, &prior).unwrap());
        assert_eq!(
            induced_distribution(&amb, &prior).unwrap_err(),
            Error::NonSimpleDevice
        );
    }

    #[test]
    fn induced_by_bayesian_devices() {
        let prior = b(&[0.3, 0.7]);
        let (mu, sels) =
            induced_distribution(&AmbiguousDevice::single(Device::fully_revealing(2)), &prior)
                .unwrap();
        assert_eq!(mu.len(), 2);
        assert!((mu.weights()[0] - 0.3).abs() < 1e-15);
        assert!(mu.support()[0].vertices()[0].distance_inf(&b(&[1.0, 0.0])) < 1e-15);
        assert!(sels[0].is_verifying(&mu, &prior, 1e-12).unwrap());
        let (mu, _) =
            induced_distribution(&AmbiguousDevice::single(Device::uninformative(2)), &prior)
                .unwrap();
        assert_eq!(mu.len(), 1);
        assert!(mu.support()[0].vertices()[0].distance_inf(&prior) < 1e-15);
    }

    #[test]
    fn crossed_simple_device_is_fully_verified() {
        let prior = b(&[0.5, 0.5]);
        let g1 = Device::new(vec![vec![0.2, 0.8], vec![0.8, 0.2]]).unwrap();
        let g2 = Device::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let amb = AmbiguousDevice::new(vec!["a".into(), "b".into()], vec![g1, g2]).unwrap();
        assert!(is_simple(&amb, &prior).unwrap());
        let (mu, sels) = induced_distribution(&amb, &prior).unwrap();
        assert_eq!(mu.len(), 2);
        assert!(mu.support()[0].same_set(&mu.support()[1]).unwrap());
        assert!(is_fully_verified(&mu, &prior).unwrap());
        for s in sels {
            assert!(s.is_verifying(&mu, &prior, 1e-12).unwrap());
        }
    }

    #[test]
    fn simple_device_inverts_bayes_rule() {
        let prior = b(&[0.3, 0.7]);
        let mu = SetDistribution::new(
            vec![set(&[&[1.0, 0.0]]), set(&[&[0.0, 1.0]])],
            vec![0.3, 0.7],
        )
        .unwrap();
        let d = simple_device_from_distribution(&mu, &prior).unwrap();
        assert_eq!(d.generators().len(), 1);
        assert!(same_device(&d.generators()[0], &Device::fully_revealing(2)));
        let mu =
            SetDistribution::new(vec![BeliefSet::singleton(prior.clone())], vec![1.0]).unwrap();
        let d = simple_device_from_distribution(&mu, &prior).unwrap();
        assert!(same_device(&d.generators()[0], &Device::uninformative(2)));
    }

    #[test]
    fn reflected_segments_round_trip() {
        let prior = b(&[0.5, 0.5]);
        let mu = SetDistribution::new(
            vec![
                set(&[&[1.0, 0.0], &[0.5, 0.5]]),
                set(&[&[0.0, 1.0], &[0.5, 0.5]]),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let d = simple_device_from_distribution(&mu, &prior).unwrap();
        assert_eq!(d.generators().len(), 2);
        assert!(is_simple(&d, &prior).unwrap());
        let (back, _) = induced_distribution(&d, &prior).unwrap();
        assert_eq!(back.len(), 2);
        for i in 0..2 {
            assert!(back.support()[i].vertex_distance(&mu.support()[i]).unwrap() < 1e-9);
            assert!((back.weights()[i] - mu.weights()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn not_fully_verified_rejected() {
        let prior = b(&[0.5, 0.5]);
        let mu = SetDistribution::new(
            vec![set(&[&[1.0, 0.0], &[0.0, 1.0]]), set(&[&[0.9, 0.1]])],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(
            simple_device_from_distribution(&mu, &prior).unwrap_err(),
            Error::NotFullyVerified
        );
    }

    #[test]
    fn dilation_examples() {
        let prior = b(&[0.5, 0.5]);
        let pi = Device::uninformative(2);
        // identity
        let g = dilate(&pi, &prior, 0, &BeliefSet::singleton(prior.clone())).unwrap();
        assert_eq!(g.n_sub(), 1);
        assert_eq!(g.probs, vec![vec![1.0, 1.0]]);
        // segment
        let target = set(&[&[0.2, 0.8], &[0.8, 0.2]]);
        let g = dilate(&pi, &prior, 0, &target).unwrap();
        assert!((g.weights[0] - 0.5).abs() < 1e-12);
        assert!((g.probs[0][0] - 0.2).abs() < 1e-12 && (g.probs[0][1] - 0.8).abs() < 1e-12);
        assert!((g.probs[1][0] - 0.8).abs() < 1e-12 && (g.probs[1][1] - 0.2).abs() < 1e-12);
        // parent posterior is a vertex: degenerate split
        let g = dilate(&pi, &prior, 0, &set(&[&[0.5, 0.5], &[1.0, 0.0]])).unwrap();
        assert!((g.weights[0] - 1.0).abs() < 1e-12 && g.weights[1].abs() < 1e-12);
        // outside
        assert!(dilate(&pi, &prior, 0, &set(&[&[0.9, 0.1], &[1.0, 0.0]])).is_err());
    }

    #[test]
    fn unreachable_vertex_reported() {
        let prior = b(&[0.7, 0.3]);
        let pi = Device::fully_revealing(2);
        let err = dilate(&pi, &prior, 0, &set(&[&[1.0, 0.0], &[0.4, 0.6]])).unwrap_err();
        assert!(matches!(err, Error::UnreachableVertex { state: 1, .. }));
    }

    #[test]
    fn permutations_compose_to_identity() {
        let prior = b(&[0.5, 0.5]);
        let g = dilate(
            &Device::uninformative(2),
            &prior,
            0,
            &set(&[&[0.2, 0.8], &[0.8, 0.2]]),
        )
        .unwrap();
        assert_eq!(permute_dilation(&g, &[0, 1]).unwrap(), g);
        let swapped = permute_dilation(&g, &[1, 0]).unwrap();
        assert_eq!(swapped.probs[0], g.probs[1]);
        assert_eq!(permute_dilation(&swapped, &[1, 0]).unwrap(), g);
        assert!(permute_dilation(&g, &[0, 0]).is_err());
        assert_eq!(permutation_closure(&g).len(), 2);
    }

    #[test]
    fn composition_examples() {
        let prior = b(&[0.3, 0.7]);
        let pi = Device::fully_revealing(2);
        let ids: Vec<DilationMap> = (0..2)
            .map(|m| DilationMap::identity(m, device_posterior(&pi, &prior, m).unwrap()))
            .collect();
        assert!(same_device(&compose(&ids, &pi).unwrap(), &pi));

        let prior = b(&[0.5, 0.5]);
        let pi = Device::uninformative(2);
        let target = set(&[&[0.2, 0.8], &[0.8, 0.2]]);
        let g = dilate(&pi, &prior, 0, &target).unwrap();
        let d = compose(&[g], &pi).unwrap();
        assert!(
            device_posterior(&d, &prior, 0)
                .unwrap()
                .distance_inf(&b(&[0.2, 0.8]))
                < 1e-12
        );
        assert!(
            device_posterior(&d, &prior, 1)
                .unwrap()
                .distance_inf(&b(&[0.8, 0.2]))
                < 1e-12
        );
    }

    #[test]
    fn build_single_segment_device() {
        let prior = b(&[0.5, 0.5]);
        let target = set(&[&[0.2, 0.8], &[0.8, 0.2]]);
        let mu = SetDistribution::new(vec![target.clone()], vec![1.0]).unwrap();
        let phi = Selection::new(vec![prior.clone()]);
        let d = build_device_from_vbp(&mu, &phi, &prior).unwrap();
        assert_eq!(d.generators().len(), 2);
        assert_eq!(d.messages(), &["m1.1".to_string(), "m1.2".to_string()]);
        for m in 0..2 {
            assert!(posterior_set(&d, &prior, m)
                .unwrap()
                .same_set(&target)
                .unwrap());
        }
        let game = Game::prosecutor(0.5).unwrap();
        let eval = evaluate_device(&game, &d).unwrap();
        assert!((eval.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn build_fully_revealing_needs_no_dilation() {
        let prior = b(&[0.3, 0.7]);
        let mu = SetDistribution::new(
            vec![set(&[&[1.0, 0.0]]), set(&[&[0.0, 1.0]])],
            vec![0.3, 0.7],
        )
        .unwrap();
        let phi = Selection::new(vec![b(&[1.0, 0.0]), b(&[0.0, 1.0])]);
        let d = build_device_from_vbp(&mu, &phi, &prior).unwrap();
        assert_eq!(d.generators().len(), 1);
        assert!(same_device(&d.generators()[0], &Device::fully_revealing(2)));
    }

    #[test]
    fn boundary_selection_rejected() {
        let prior = b(&[0.5, 0.5]);
        let mu = SetDistribution::new(
            vec![set(&[&[0.5, 0.5], &[1.0, 0.0]]), set(&[&[0.5, 0.5]])],
            vec![0.5, 0.5],
        )
        .unwrap();
        let phi = Selection::new(vec![b(&[0.5, 0.5]), b(&[0.5, 0.5])]);
        assert!(matches!(
            build_device_from_vbp(&mu, &phi, &prior),
            Err(Error::BoundaryPosterior { .. })
        ));
    }

    #[test]
    fn evaluation_examples() {
        let game = Game::prosecutor(0.3).unwrap();
        let unin = AmbiguousDevice::single(Device::uninformative(2));
        assert!(evaluate_device(&game, &unin).unwrap().value.abs() < 1e-9);
        let full = AmbiguousDevice::single(Device::fully_revealing(2));
        assert!((evaluate_device(&game, &full).unwrap().value - 0.3).abs() < 1e-9);
    }

    #[test]
    fn sender_value_examples() {
        let game = Game::prosecutor(0.3).unwrap();
        let mu = SetDistribution::new(vec![BeliefSet::singleton(game.prior.clone())], vec![1.0])
            .unwrap();
        let phi = Selection::new(vec![game.prior.clone()]);
        assert!(sender_value(&game, &mu, &phi).unwrap().abs() < 1e-9);
        let bad = Selection::new(vec![b(&[0.5, 0.5])]);
        assert!(sender_value(&game, &mu, &bad).is_err());
    }

    #[test]
    fn mixtures_never_raise_value() {
        let game = Game::prosecutor(0.5).unwrap();
        let prior = game.prior.clone();
        let mu = SetDistribution::new(vec![set(&[&[0.2, 0.8], &[0.8, 0.2]])], vec![1.0]).unwrap();
        let d = build_device_from_vbp(&mu, &Selection::new(vec![prior]), &game.prior).unwrap();
        let plain = evaluate_device(&game, &d).unwrap();
        let refined = evaluate_device_refined(&game, &d, 20, 7).unwrap();
        assert!(refined.value <= plain.value + 1e-12);
        assert!(refined.gap >= 0.0);
        assert_eq!(refined, evaluate_device_refined(&game, &d, 20, 7).unwrap());
    }
}
