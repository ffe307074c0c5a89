//! Cross-play scheduling and the metagame tensor.
//!
//! Fixed-partner mechanisms enumerate every seat assignment over the roster
//! (roster^seats, row-major), repeat each assignment a configured number of
//! times with derived seeds, and accumulate normalized δ-weighted payoffs
//! into a dense [`MetagameTensor`]. Reputation mechanisms replace the
//! cross-product with pooled episodes over the union of the roster and
//! report per-kind means only.
//!
//! Episodes run in parallel up to the configured bound; results are
//! accumulated in deterministic order, so rerunning a config reproduces the
//! episode log byte for byte.

use std::collections::HashSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{
    AgentError, AgentKind, ChatTransport, Decider, ExternalAgent, ScriptedAgent,
};
use crate::episode::{run_episode, EpisodeError, EpisodeRecord};
use crate::game::Game;
use crate::mechanism::{repetition_weighted_payoff, MechanismConfig};

/// Everything needed to schedule one tournament.
#[derive(Debug, Clone)]
pub struct TournamentConfig {
    pub game: Game,
    pub mechanism: MechanismConfig,
    pub roster: Vec<AgentKind>,
    /// Episodes per seat assignment (or pooled episodes, for reputation).
    pub repeats: usize,
    pub base_seed: u64,
    /// Worker threads; `None` uses the global default.
    pub parallelism: Option<usize>,
    /// When set, any aborted episode fails the run instead of marking it
    /// incomplete.
    pub require_complete: bool,
}

impl TournamentConfig {
    pub fn new(game: Game, mechanism: MechanismConfig, roster: Vec<AgentKind>) -> Self {
        TournamentConfig {
            game,
            mechanism,
            roster,
            repeats: 3,
            base_seed: 0,
            parallelism: None,
            require_complete: false,
        }
    }
}

/// One scheduled episode: where it sat in the plan, what happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    /// Roster indices by seat; empty for pooled reputation episodes.
    pub assignment: Vec<usize>,
    pub repeat: usize,
    pub seed: u64,
    pub record: EpisodeRecord,
}

/// Mean normalized payoffs for one seat assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    /// Roster indices by seat.
    pub assignment: Vec<usize>,
    /// Mean normalized weighted payoff per seat (NaN when nothing
    /// completed).
    pub mean: Vec<f64>,
    /// Standard error of that mean per seat (0 below two samples).
    pub stderr: Vec<f64>,
    /// Completed episodes behind the entry.
    pub count: usize,
}

/// Dense cross-play results: one entry per element of roster^seats, in
/// row-major assignment order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetagameTensor {
    pub roster: Vec<AgentKind>,
    pub seats: usize,
    pub entries: Vec<TensorEntry>,
}

impl MetagameTensor {
    /// Row-major position of an assignment.
    pub fn index_of(&self, assignment: &[usize]) -> usize {
        let mut index = 0;
        for &kind in assignment {
            index = index * self.roster.len() + kind;
        }
        index
    }

    pub fn entry(&self, assignment: &[usize]) -> &TensorEntry {
        &self.entries[self.index_of(assignment)]
    }

    /// Normalized payoff cells of one kind: every (entry, seat) the kind
    /// occupies, uniformly weighted. The backbone of per-kind scalars on
    /// seat-asymmetric games.
    pub fn cells_for_kind(&self, kind: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().flat_map(move |entry| {
            entry
                .assignment
                .iter()
                .enumerate()
                .filter(move |&(_, &k)| k == kind)
                .map(|(seat, _)| (entry.mean[seat], entry.stderr[seat]))
        })
    }
}

/// Per-kind results of pooled reputation play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledKindStat {
    pub kind: AgentKind,
    /// Mean normalized weighted payoff over the kind's pool members and
    /// episodes.
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// What a tournament hands back: the ordered episode log plus the
/// aggregate for the mechanism family that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentResult {
    pub rows: Vec<EpisodeRow>,
    /// Cross-play aggregate (fixed-partner variants).
    pub tensor: Option<MetagameTensor>,
    /// Per-kind aggregate (reputation variants).
    pub pooled: Option<Vec<PooledKindStat>>,
    /// False when any episode aborted.
    pub complete: bool,
}

/// One per-kind value with its uncertainty, for cross-game tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: AgentKind,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("tournament roster is empty")]
    EmptyRoster,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("cross-play enumeration covers fixed-partner variants; reputation runs pool the roster instead")]
    ReputationCrossPlay,
    #[error("agent kind {kind} needs a chat transport")]
    NeedsTransport { kind: String },
    #[error("resumed log row (assignment {assignment:?}, repeat {repeat}) does not belong to this plan")]
    ForeignRow { assignment: Vec<usize>, repeat: usize },
    #[error("run incomplete: {aborted} episode(s) aborted")]
    Incomplete { aborted: usize },
    #[error("per-game tables disagree on the roster")]
    RosterMismatch,
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Full cross-product of roster indices over the game's seats, row-major
/// (last seat varies fastest). Reputation variants have no fixed seat
/// assignments and are rejected.
pub fn enumerate_assignments(
    roster: &[AgentKind],
    game: &Game,
    config: &MechanismConfig,
) -> Result<Vec<Vec<usize>>, TournamentError> {
    if config.variant.is_reputation() {
        return Err(TournamentError::ReputationCrossPlay);
    }
    if roster.is_empty() {
        return Err(TournamentError::EmptyRoster);
    }
    let n = game.players();
    let k = roster.len();
    let total = k.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut assignment = vec![0usize; n];
    for _ in 0..total {
        out.push(assignment.clone());
        for seat in (0..n).rev() {
            assignment[seat] += 1;
            if assignment[seat] < k {
                break;
            }
            assignment[seat] = 0;
        }
    }
    Ok(out)
}

/// Stable per-episode seed: splitmix64 absorption of the assignment and
/// repeat indices into the base seed. Explicit so logs replay across
/// platforms and releases.
pub fn episode_seed(base: u64, assignment: u64, repeat: u64) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut seed = base;
    for word in [assignment, repeat] {
        seed = mix(seed.wrapping_add(GOLDEN).wrapping_add(word));
    }
    seed
}

fn build_agent(
    kind: &AgentKind,
    transport: Option<&Arc<dyn ChatTransport>>,
) -> Result<Box<dyn Decider>, TournamentError> {
    if kind.is_scripted() {
        Ok(Box::new(ScriptedAgent::new(kind.clone())?))
    } else {
        let transport = transport
            .ok_or_else(|| TournamentError::NeedsTransport { kind: kind.to_string() })?;
        let agent = ExternalAgent::from_kind(kind, Arc::clone(transport))
            .expect("non-scripted kinds are external");
        Ok(Box::new(agent))
    }
}

/// Runs (or resumes) the whole plan. `prior` rows from an earlier run of
/// the same config are kept as-is and their episodes are not replayed; the
/// returned rows are always the complete plan in canonical order.
pub fn run_tournament(
    config: &TournamentConfig,
    transport: Option<Arc<dyn ChatTransport>>,
    prior: &[EpisodeRow],
) -> Result<TournamentResult, TournamentError> {
    if config.roster.is_empty() {
        return Err(TournamentError::EmptyRoster);
    }
    if config.repeats == 0 {
        return Err(TournamentError::NoRepeats);
    }

    // The plan: every (assignment, repeat) pair, in canonical order.
    let pooled_mode = config.mechanism.variant.is_reputation();
    let assignments = if pooled_mode {
        vec![Vec::new()]
    } else {
        enumerate_assignments(&config.roster, &config.game, &config.mechanism)?
    };
    let mut plan = Vec::with_capacity(assignments.len() * config.repeats);
    for (index, assignment) in assignments.iter().enumerate() {
        for repeat in 0..config.repeats {
            plan.push((index, assignment.clone(), repeat));
        }
    }

    let planned: HashSet<(Vec<usize>, usize)> =
        plan.iter().map(|(_, a, r)| (a.clone(), *r)).collect();
    let mut done: HashSet<(Vec<usize>, usize)> = HashSet::new();
    for row in prior {
        let key = (row.assignment.clone(), row.repeat);
        if !planned.contains(&key) {
            return Err(TournamentError::ForeignRow {
                assignment: row.assignment.clone(),
                repeat: row.repeat,
            });
        }
        done.insert(key);
    }

    let todo: Vec<&(usize, Vec<usize>, usize)> = plan
        .iter()
        .filter(|(_, a, r)| !done.contains(&(a.clone(), *r)))
        .collect();

    let run_one = |&&(index, ref assignment, repeat): &&(usize, Vec<usize>, usize)| {
        let seed = episode_seed(config.base_seed, index as u64, repeat as u64);
        let kinds: Vec<&AgentKind> = if pooled_mode {
            pool_members(&config.roster, &config.game, &config.mechanism)
        } else {
            assignment.iter().map(|&k| &config.roster[k]).collect()
        };
        let mut agents = kinds
            .into_iter()
            .map(|kind| build_agent(kind, transport.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let record = run_episode(&config.game, &config.mechanism, &mut agents, &mut rng)?;
        Ok(EpisodeRow { assignment: assignment.clone(), repeat, seed, record })
    };
    let fresh: Result<Vec<EpisodeRow>, TournamentError> = match config.parallelism {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            pool.install(|| todo.par_iter().map(run_one).collect())
        }
        None => todo.par_iter().map(run_one).collect(),
    };
    let fresh = fresh?;

    // Stitch prior and fresh rows back into plan order.
    let mut by_key: std::collections::HashMap<(Vec<usize>, usize), EpisodeRow> = prior
        .iter()
        .cloned()
        .chain(fresh)
        .map(|row| ((row.assignment.clone(), row.repeat), row))
        .collect();
    let rows: Vec<EpisodeRow> = plan
        .iter()
        .map(|(_, a, r)| by_key.remove(&(a.clone(), *r)).expect("every plan entry ran"))
        .collect();

    let aborted = rows.iter().filter(|row| !row.record.is_complete()).count();
    if config.require_complete && aborted > 0 {
        return Err(TournamentError::Incomplete { aborted });
    }

    let (tensor, pooled) = if pooled_mode {
        (None, Some(pooled_stats(config, &rows)))
    } else {
        (Some(build_tensor(config, &assignments, &rows)), None)
    };
    Ok(TournamentResult { rows, tensor, pooled, complete: aborted == 0 })
}

/// Pool composition for reputation play: the roster cycled over one slot
/// per (kind, seat) by default, or over `population_size` when configured.
fn pool_members<'a>(
    roster: &'a [AgentKind],
    game: &Game,
    mechanism: &MechanismConfig,
) -> Vec<&'a AgentKind> {
    let size = mechanism.population_size.unwrap_or(roster.len() * game.players());
    (0..size).map(|i| &roster[i % roster.len()]).collect()
}

fn build_tensor(
    config: &TournamentConfig,
    assignments: &[Vec<usize>],
    rows: &[EpisodeRow],
) -> MetagameTensor {
    let seats = config.game.players();
    let mut samples: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::new(); seats]; assignments.len()];
    let index_of = |assignment: &[usize]| {
        assignment.iter().fold(0usize, |acc, &k| acc * config.roster.len() + k)
    };
    for row in rows {
        if !row.record.is_complete() {
            continue;
        }
        let entry = &mut samples[index_of(&row.assignment)];
        for seat in 0..seats {
            entry[seat]
                .push(config.game.normalize_payoff(seat, row.record.weighted_payoffs[seat]));
        }
    }
    let entries = assignments
        .iter()
        .zip(samples)
        .map(|(assignment, per_seat)| {
            let count = per_seat[0].len();
            let (mean, stderr) = per_seat
                .iter()
                .map(|values| mean_and_stderr(values))
                .unzip();
            TensorEntry { assignment: assignment.clone(), mean, stderr, count }
        })
        .collect();
    MetagameTensor { roster: config.roster.clone(), seats, entries }
}

fn pooled_stats(config: &TournamentConfig, rows: &[EpisodeRow]) -> Vec<PooledKindStat> {
    let members = pool_members(&config.roster, &config.game, &config.mechanism);
    let mut per_kind: Vec<Vec<f64>> = vec![Vec::new(); config.roster.len()];
    for row in rows {
        if !row.record.is_complete() {
            continue;
        }
        for (member, kind) in members.iter().enumerate() {
            let stream: Vec<f64> = row
                .record
                .rounds
                .iter()
                .filter_map(|r| {
                    r.seat_of(member)
                        .map(|seat| config.game.normalize_payoff(seat, r.payoffs[seat]))
                })
                .collect();
            let value = repetition_weighted_payoff(&stream, config.mechanism.delta);
            let slot = config
                .roster
                .iter()
                .position(|k| k == *kind)
                .expect("pool members come from the roster");
            per_kind[slot].push(value);
        }
    }
    config
        .roster
        .iter()
        .zip(per_kind)
        .map(|(kind, values)| {
            let (mean, stderr) = mean_and_stderr(&values);
            PooledKindStat { kind: kind.clone(), mean, stderr, samples: values.len() }
        })
        .collect()
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unweighted cross-game mean of per-kind values, with standard errors
/// propagated under independence: se = sqrt(Σ se_g²) / G.
pub fn aggregate_across_games(
    per_game: &[Vec<KindSummary>],
) -> Result<Vec<KindSummary>, TournamentError> {
    let first = per_game.first().ok_or(TournamentError::RosterMismatch)?;
    let kinds: Vec<&AgentKind> = first.iter().map(|s| &s.kind).collect();
    for table in per_game {
        if table.len() != kinds.len()
            || table.iter().zip(&kinds).any(|(s, k)| s.kind != **k)
        {
            return Err(TournamentError::RosterMismatch);
        }
    }
    let games = per_game.len() as f64;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let value = per_game.iter().map(|t| t[i].value).sum::<f64>() / games;
            let stderr =
                per_game.iter().map(|t| t[i].stderr.powi(2)).sum::<f64>().sqrt() / games;
            KindSummary { kind: kind.clone(), value, stderr }
        })
        .collect())
}
