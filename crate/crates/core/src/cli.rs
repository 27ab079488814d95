//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when the input is valid
//! but the requested object does not exist (not verifiably Bayes plausible,
//! unreachable vertex, and so on).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, BeliefSet, Game, GridSpec, PayoffMatrix};
use crate::concavify::{
    concave_closure_at, solve_ambiguous_persuasion, solve_bayesian_persuasion, Diagnostics,
    PosteriorPlan, WeightedBelief,
};
use crate::device::{
    build_device_from_vbp, evaluate_device, evaluate_device_refined, posterior_set, sender_value,
};
use crate::error::Error;
use crate::oracle::{brute_force_device_search, brute_force_value, DeviceSearch, OracleConfig};
use crate::value::{value_grid, CandidateConfig, ValueSample};
use crate::vbp::{
    is_fully_verified, verify_vbp, verifying_posterior_sets, Selection, SetDistribution,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const DEFAULT_GRID: u32 = 20;
const DEFAULT_KMAX: usize = 2;
const DEFAULT_MIXTURES: usize = 50;
const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "ambipersuade",
    version,
    about = "Persuasion with an ambiguity-averse receiver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a game and write the full report.
    Solve(Options),
    /// Bayesian persuasion baseline only.
    Bayesian(Options),
    /// Value functions on the grid as CSV.
    ValueGrid(Options),
    /// Check whether a distribution over belief sets is verifiably Bayes plausible.
    CheckVbp(MuOptions),
    /// Build the ambiguous device for a distribution and selection.
    ConstructDevice(MuOptions),
    /// Run the brute-force baselines.
    Oracle(OracleOptions),
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Game spec file (TOML) or a preset name (`prosecutor`).
    #[arg(long)]
    pub game: Option<String>,
    /// Grid resolution.
    #[arg(long)]
    pub grid: Option<u32>,
    /// Largest number of grid points spanning a candidate set.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Seed for sampled device mixtures.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct MuOptions {
    /// Distribution file (TOML) with `[[set]]` entries.
    #[arg(long)]
    pub mu: PathBuf,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Debug, Clone)]
pub struct OracleOptions {
    /// Device grid resolution (entries are multiples of 1/steps).
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long)]
    pub messages: Option<usize>,
    #[arg(long)]
    pub generators: Option<usize>,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if e.is_infeasibility() => EXIT_INFEASIBLE,
            _ => EXIT_INVALID,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Optional `[solver]` block of a game spec.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub grid: Option<u32>,
    pub k_max: Option<usize>,
    pub tolerance: Option<f64>,
    pub mixtures: Option<usize>,
    pub seed: Option<u64>,
    pub oracle: Option<OracleConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GameSpecFile {
    states: Vec<String>,
    prior: Vec<f64>,
    actions: Vec<String>,
    #[serde(rename = "u_S")]
    u_s: Vec<Vec<f64>>,
    #[serde(rename = "u_R")]
    u_r: Vec<Vec<f64>>,
    #[serde(default)]
    solver: SolverBlock,
}

/// Parses a game spec document.
pub fn parse_game_spec(text: &str) -> std::result::Result<(Game, SolverBlock), String> {
    let spec: GameSpecFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let game = Game::new(
        spec.states,
        Belief::new(spec.prior).map_err(|e| e.to_string())?,
        spec.actions,
        PayoffMatrix::new(spec.u_s).map_err(|e| e.to_string())?,
        PayoffMatrix::new(spec.u_r).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    Ok((game, spec.solver))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_game(name: &str) -> CliResult<(Game, SolverBlock)> {
    let path = Path::new(name);
    if !path.exists() {
        if name == "prosecutor" {
            return Ok((Game::prosecutor(0.3)?, SolverBlock::default()));
        }
        return Err(CliError::Usage(format!(
            "no game file or preset named {name:?}"
        )));
    }
    parse_game_spec(&read(path)?).map_err(|message| CliError::Parse {
        path: name.to_string(),
        message,
    })
}

fn require_game(opts: &Options) -> CliResult<(Game, SolverBlock)> {
    let name = opts
        .game
        .as_deref()
        .ok_or_else(|| CliError::Usage("--game is required".into()))?;
    load_game(name)
}

/// Settings after merging flags over the spec's `[solver]` block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub grid: u32,
    pub k_max: usize,
    pub mixtures: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Settings {
    fn merge(opts: &Options, block: &SolverBlock) -> CliResult<Self> {
        let s = Self {
            grid: opts.grid.or(block.grid).unwrap_or(DEFAULT_GRID),
            k_max: opts.kmax.or(block.k_max).unwrap_or(DEFAULT_KMAX),
            mixtures: block.mixtures.unwrap_or(DEFAULT_MIXTURES),
            seed: opts.seed.or(block.seed).unwrap_or(0),
            tolerance: opts
                .tolerance
                .or(block.tolerance)
                .unwrap_or(DEFAULT_TOLERANCE),
        };
        if s.grid == 0 {
            return Err(Error::validation("grid resolution must be positive").into());
        }
        if s.tolerance.is_nan() || s.tolerance <= 0.0 {
            return Err(Error::validation("tolerance must be positive").into());
        }
        Ok(s)
    }

    fn spec(&self) -> CliResult<GridSpec> {
        Ok(GridSpec::new(self.grid)?)
    }

    fn candidates(&self) -> CliResult<CandidateConfig> {
        Ok(CandidateConfig::new(self.spec()?, self.k_max))
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
pub struct BayesianSection {
    pub value: f64,
    pub tau: Vec<WeightedBelief>,
}

#[derive(Serialize, Deserialize)]
pub struct AmbiguousSection {
    pub value: f64,
    pub tau: Vec<PosteriorPlan>,
}

#[derive(Serialize, Deserialize)]
pub struct Certificate {
    pub mu: SetDistribution,
    pub phi: Selection,
}

#[derive(Serialize, Deserialize)]
pub struct Refinement {
    pub mixtures: usize,
    pub seed: u64,
    pub value: f64,
    pub gap: f64,
}

#[derive(Serialize, Deserialize)]
pub struct DeviceSection {
    pub messages: Vec<String>,
    pub generators: Vec<Vec<Vec<f64>>>,
    pub posterior_sets: Vec<BeliefSet>,
    /// Worst-case value of this device.
    pub value: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    pub certificate: Certificate,
    pub refinement: Refinement,
}

#[derive(Serialize, Deserialize)]
pub struct Report {
    pub game: Game,
    pub settings: SettingsEcho,
    pub bayesian: BayesianSection,
    pub ambiguous: AmbiguousSection,
    pub certificate: Certificate,
    pub device: DeviceSection,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize, Deserialize)]
pub struct SettingsEcho {
    pub grid: u32,
    pub k_max: usize,
    pub mixtures: usize,
    pub seed: u64,
}

/// Rows of the value-grid CSV: belief, `v_bp`, `v`, and the concave
/// closure of `v` at that belief.
fn csv_rows(samples: &[ValueSample]) -> CliResult<Vec<(Vec<f64>, f64, f64, f64)>> {
    let pts: Vec<(Belief, f64)> = samples.iter().map(|s| (s.belief.clone(), s.v)).collect();
    samples
        .iter()
        .map(|s| {
            let hat = concave_closure_at(&pts, &s.belief)?.value;
            Ok((s.belief.as_slice().to_vec(), s.v_bp, s.v, hat))
        })
        .collect()
}

fn write_csv(game: &Game, samples: &[ValueSample], path: Option<&Path>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = game.states.clone();
    header.extend(["v_bp", "v", "v_hat"].map(String::from));
    let io = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(&header).map_err(io)?;
    for (p, v_bp, v, hat) in csv_rows(samples)? {
        let mut rec: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        rec.extend([v_bp, v, hat].map(|x| x.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    emit(path, &String::from_utf8(bytes).expect("csv is utf-8"))
}

fn solve(opts: &Options) -> CliResult<()> {
    let (game, block) = require_game(opts)?;
    let settings = Settings::merge(opts, &block)?;
    let started = Instant::now();
    let sol = solve_ambiguous_persuasion(&game, settings.spec()?, &settings.candidates()?)?;
    let device = &sol.construction.device;
    let refined = evaluate_device_refined(&game, device, settings.mixtures, settings.seed)?;
    let posterior_sets = device
        .support()
        .into_iter()
        .map(|m| posterior_set(device, &game.prior, m))
        .collect::<crate::error::Result<Vec<_>>>()?;
    let report = Report {
        settings: SettingsEcho {
            grid: settings.grid,
            k_max: settings.k_max,
            mixtures: settings.mixtures,
            seed: settings.seed,
        },
        bayesian: BayesianSection {
            value: sol.bayesian_value,
            tau: sol.bayesian_tau.clone(),
        },
        ambiguous: AmbiguousSection {
            value: sol.value,
            tau: sol.tau.clone(),
        },
        certificate: Certificate {
            mu: sol.mu.clone(),
            phi: sol.phi.clone(),
        },
        device: DeviceSection {
            messages: device.messages().to_vec(),
            generators: device
                .generators()
                .iter()
                .map(|g| g.rows().to_vec())
                .collect(),
            posterior_sets,
            value: sol.construction.value,
            exact: sol.construction.exact,
            note: sol.construction.note.clone(),
            certificate: Certificate {
                mu: sol.construction.mu.clone(),
                phi: sol.construction.phi.clone(),
            },
            refinement: Refinement {
                mixtures: settings.mixtures,
                seed: settings.seed,
                value: refined.value,
                gap: sol.construction.value - refined.value,
            },
        },
        diagnostics: sol.diagnostics.clone(),
        game,
    };
    emit(opts.out.as_deref(), &to_json(&report))?;
    if let Some(csv) = &opts.csv {
        let samples = value_grid(&report.game, settings.spec()?, &settings.candidates()?)?;
        write_csv(&report.game, &samples, Some(csv))?;
    }
    eprintln!("solved in {:.3}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn bayesian(opts: &Options) -> CliResult<()> {
    let (game, block) = require_game(opts)?;
    let settings = Settings::merge(opts, &block)?;
    let c = solve_bayesian_persuasion(&game, settings.spec()?)?;
    emit(
        opts.out.as_deref(),
        &to_json(&BayesianSection {
            value: c.value,
            tau: c.tau,
        }),
    )
}

fn value_grid_cmd(opts: &Options) -> CliResult<()> {
    let (game, block) = require_game(opts)?;
    let settings = Settings::merge(opts, &block)?;
    let samples = value_grid(&game, settings.spec()?, &settings.candidates()?)?;
    write_csv(&game, &samples, opts.csv.as_deref().or(opts.out.as_deref()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MuFile {
    prior: Option<Vec<f64>>,
    #[serde(rename = "set")]
    sets: Vec<MuEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MuEntry {
    weight: f64,
    vertices: Vec<Vec<f64>>,
    pick: Option<Vec<f64>>,
}

/// A distribution over belief sets read from file, with the prior and an
/// optional selection.
pub struct MuSpec {
    pub mu: SetDistribution,
    pub prior: Belief,
    pub picks: Option<Selection>,
}

/// Parses a distribution document; `fallback_prior` is used when the
/// document has no `prior`.
pub fn parse_mu_spec(
    text: &str,
    fallback_prior: Option<&Belief>,
) -> std::result::Result<MuSpec, String> {
    let file: MuFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let prior = match (file.prior, fallback_prior) {
        (Some(p), _) => Belief::new(p).map_err(|e| e.to_string())?,
        (None, Some(p)) => p.clone(),
        (None, None) => return Err("no prior: give `prior` in the file or pass --game".into()),
    };
    let mut sets = Vec::new();
    let mut weights = Vec::new();
    let mut picks = Vec::new();
    for (i, e) in file.sets.iter().enumerate() {
        let verts = e
            .vertices
            .iter()
            .map(|v| Belief::new(v.clone()))
            .collect::<crate::error::Result<Vec<_>>>()
            .map_err(|err| format!("set {i}: {err}"))?;
        sets.push(BeliefSet::new(verts).map_err(|err| format!("set {i}: {err}"))?);
        weights.push(e.weight);
        if let Some(p) = &e.pick {
            picks.push(Belief::new(p.clone()).map_err(|err| format!("set {i}: {err}"))?);
        }
    }
    let picks = match picks.len() {
        0 => None,
        n if n == sets.len() => Some(Selection::new(picks)),
        _ => return Err("either every set or no set has a `pick`".into()),
    };
    let mu = SetDistribution::new(sets, weights).map_err(|e| e.to_string())?;
    if mu.dim() != prior.dim() {
        return Err(format!(
            "sets have {} states but the prior has {}",
            mu.dim(),
            prior.dim()
        ));
    }
    Ok(MuSpec { mu, prior, picks })
}

fn load_mu(args: &MuOptions) -> CliResult<(MuSpec, Option<Game>)> {
    let game = match &args.opts.game {
        Some(name) => Some(load_game(name)?.0),
        None => None,
    };
    let spec =
        parse_mu_spec(&read(&args.mu)?, game.as_ref().map(|g| &g.prior)).map_err(|message| {
            CliError::Parse {
                path: args.mu.display().to_string(),
                message,
            }
        })?;
    Ok((spec, game))
}

#[derive(Serialize)]
struct VbpCheck {
    vbp: bool,
    selection: Selection,
    #[serde(skip_serializing_if = "Option::is_none")]
    given_selection_verifies: Option<bool>,
    fully_verified: bool,
    verifying_posterior_sets: Vec<BeliefSet>,
}

fn check_vbp(args: &MuOptions) -> CliResult<()> {
    let (spec, _) = load_mu(args)?;
    let tol = args.opts.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let Some(selection) = verify_vbp(&spec.mu, &spec.prior)? else {
        emit(args.opts.out.as_deref(), "not VBP\n")?;
        return Err(Error::NotVbp.into());
    };
    let check = VbpCheck {
        vbp: true,
        given_selection_verifies: spec
            .picks
            .as_ref()
            .map(|p| p.is_verifying(&spec.mu, &spec.prior, tol))
            .transpose()?,
        fully_verified: is_fully_verified(&spec.mu, &spec.prior)?,
        verifying_posterior_sets: verifying_posterior_sets(&spec.mu, &spec.prior)?,
        selection,
    };
    emit(args.opts.out.as_deref(), &to_json(&check))
}

#[derive(Serialize)]
struct ConstructedDevice {
    messages: Vec<String>,
    generators: Vec<Vec<Vec<f64>>>,
    posterior_sets: Vec<BeliefSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sender_value: Option<f64>,
}

fn construct_device(args: &MuOptions) -> CliResult<()> {
    let (spec, game) = load_mu(args)?;
    let tol = args.opts.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let phi = match spec.picks {
        Some(p) => {
            if !p.is_verifying(&spec.mu, &spec.prior, tol)? {
                return Err(Error::Infeasible(
                    "the given picks do not verify the distribution".into(),
                )
                .into());
            }
            p
        }
        None => verify_vbp(&spec.mu, &spec.prior)?.ok_or(Error::NotVbp)?,
    };
    let device = build_device_from_vbp(&spec.mu, &phi, &spec.prior)?;
    let posterior_sets = device
        .support()
        .into_iter()
        .map(|m| posterior_set(&device, &spec.prior, m))
        .collect::<crate::error::Result<Vec<_>>>()?;
    let (value, sv) = match game {
        Some(g) => {
            let g = g.with_prior(spec.prior.clone())?;
            (
                Some(evaluate_device(&g, &device)?.value),
                Some(sender_value(&g, &spec.mu, &phi)?),
            )
        }
        None => (None, None),
    };
    let out = ConstructedDevice {
        messages: device.messages().to_vec(),
        generators: device
            .generators()
            .iter()
            .map(|g| g.rows().to_vec())
            .collect(),
        posterior_sets,
        value,
        sender_value: sv,
    };
    emit(args.opts.out.as_deref(), &to_json(&out))
}

#[derive(Serialize)]
struct OracleReport {
    config: OracleConfig,
    value_at_prior: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    device_search: Option<DeviceSearch>,
    solver_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    difference: Option<f64>,
}

fn oracle(args: &OracleOptions) -> CliResult<()> {
    let (game, block) = require_game(&args.opts)?;
    let settings = Settings::merge(&args.opts, &block)?;
    let mut cfg = block.oracle.unwrap_or_default();
    if let Some(s) = args.steps {
        cfg.device_steps = s;
    }
    if let Some(m) = args.messages {
        cfg.max_messages = m;
    }
    if let Some(g) = args.generators {
        cfg.max_generators = g;
    }
    let value_at_prior = brute_force_value(&game, &game.prior, &cfg)?;
    let device_search = if game.n_states() == 2 {
        Some(brute_force_device_search(&game, &game.prior, &cfg)?)
    } else {
        None
    };
    let solver_value =
        solve_ambiguous_persuasion(&game, settings.spec()?, &settings.candidates()?)?.value;
    let report = OracleReport {
        config: cfg,
        value_at_prior,
        difference: device_search
            .as_ref()
            .map(|d| (solver_value - d.value).abs()),
        device_search,
        solver_value,
    };
    emit(args.opts.out.as_deref(), &to_json(&report))
}

/// Runs one command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(o) => solve(o),
        Command::Bayesian(o) => bayesian(o),
        Command::ValueGrid(o) => value_grid_cmd(o),
        Command::CheckVbp(a) => check_vbp(a),
        Command::ConstructDevice(a) => construct_device(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
