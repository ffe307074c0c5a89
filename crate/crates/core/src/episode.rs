//! One episode end to end: proposals, approval voting, signatures, rounds,
//! and δ-weighted scoring.
//!
//! The pipeline depends on the mechanism variant. One-shot play is a single
//! simultaneous round. Repetition replays the same seats for `horizon`
//! rounds, serving each agent a window of the matchup's past. The reputation
//! variants rematch a pooled population uniformly at random every round and
//! serve per-agent history views (first-order or recursively expanded).
//! Mediation runs propose → vote → act-with-delegation; contracting runs
//! propose → vote → sign → act, on the transformed game if every signature
//! landed and on the base game otherwise.
//!
//! Agent failures split two ways: malformed or unreachable models abort the
//! episode (recorded, excluded from scoring); everything else — bad roster
//! shapes, misbehaving [`Decider`] implementations — is a hard error.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{
    AgentError, Decider, DecisionPayload, DecisionRequest, MechanismContext, Phase,
};
use crate::game::{sample_profile, Game, GameError, MixedAction, StrategyProfile};
use crate::history::{build_history_view, HistoryOrder, HistoryRecord, ReputationLog};
use crate::mechanism::{
    apply_contract, delegate_action, repetition_weighted_payoff, run_proposal_vote, ContractSpec,
    MechanismConfig, MechanismError, MechanismVariant, MediatorSpec,
};

/// Why an episode stopped before producing scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeAbort {
    /// Roster index of the failing agent (seat for fixed-partner variants,
    /// pool id for reputation variants).
    pub agent: usize,
    pub phase: Phase,
    /// True when the model could not be reached at all, false when it kept
    /// answering with malformed output.
    pub transport: bool,
    pub message: String,
}

/// Terminal state of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    Completed,
    Aborted(EpisodeAbort),
}

/// The full, replayable trace of one episode.
///
/// Raw payoffs are on the game's own scale (normalization is the
/// tournament's business). In reputation episodes `rounds` holds one record
/// per group per global round, ordered by round then by matching order, and
/// per-agent indices refer to pool ids; everywhere else they are seats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub config: MechanismConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mediator_proposals: Option<Vec<MediatorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract_proposals: Option<Vec<ContractSpec>>,
    /// Per-voter approval ballots, in seat order; ballot index = proposer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ballots: Option<Vec<Vec<bool>>>,
    /// Winning proposal index (equals the proposer's seat).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winning_proposal: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signatures: Option<Vec<bool>>,
    /// Who handed their choice to the elected mediator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delegations: Option<Vec<bool>>,
    /// Realized per-seat payments of the active contract (sums to zero).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfers: Option<Vec<f64>>,
    pub rounds: Vec<HistoryRecord>,
    /// Raw payoff stream per agent, one entry per round the agent played.
    pub round_payoffs: Vec<Vec<f64>>,
    /// δ-weighted average per agent; empty when the episode aborted.
    pub weighted_payoffs: Vec<f64>,
    pub status: EpisodeStatus,
}

impl EpisodeRecord {
    pub fn is_complete(&self) -> bool {
        self.status == EpisodeStatus::Completed
    }
}

/// Hard failures: the episode could not be run as configured.
#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("fixed-partner play seats exactly {want} agents, got {got}")]
    RosterSize { got: usize, want: usize },
    #[error("reputation pool of {got} agents cannot play in groups of {group}")]
    PoolSize { got: usize, group: usize },
    #[error("agent {agent} answered the {phase} phase with the wrong shape")]
    BadPayload { agent: usize, phase: Phase },
    #[error(transparent)]
    Agent(AgentError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Runs one episode of `game` under `config` with the given roster: one
/// agent per seat for fixed-partner variants, the whole pool for reputation
/// variants. Identical inputs and rng state reproduce the record exactly.
pub fn run_episode<R: Rng + ?Sized>(
    game: &Game,
    config: &MechanismConfig,
    agents: &mut [Box<dyn Decider>],
    rng: &mut R,
) -> Result<EpisodeRecord, EpisodeError> {
    let n = game.players();
    config.validate(n)?;
    let variant = config.variant;
    if variant.is_reputation() {
        if let Some(size) = config.population_size {
            if agents.len() != size {
                return Err(EpisodeError::RosterSize { got: agents.len(), want: size });
            }
        }
        if agents.is_empty() || !agents.len().is_multiple_of(n) {
            return Err(EpisodeError::PoolSize { got: agents.len(), group: n });
        }
    } else if agents.len() != n {
        return Err(EpisodeError::RosterSize { got: agents.len(), want: n });
    }

    let scored = if variant.is_reputation() { agents.len() } else { n };
    let run = Run {
        game,
        config,
        agents,
        rng,
        abort: None,
        rounds: Vec::new(),
        streams: vec![Vec::new(); scored],
        mediator_proposals: None,
        contract_proposals: None,
        ballots: None,
        winning_proposal: None,
        signatures: None,
        delegations: None,
        transfers: None,
    };
    match variant {
        MechanismVariant::NoMechanism => run.one_shot(),
        MechanismVariant::Repetition => run.repetition(),
        MechanismVariant::ReputationMinus => run.reputation(HistoryOrder::FirstOrder),
        MechanismVariant::ReputationPlus => run.reputation(HistoryOrder::HigherOrder),
        MechanismVariant::Mediation => run.mediation(),
        MechanismVariant::Contracting => run.contracting(),
    }
}

struct Run<'a, R: Rng + ?Sized> {
    game: &'a Game,
    config: &'a MechanismConfig,
    agents: &'a mut [Box<dyn Decider>],
    rng: &'a mut R,
    abort: Option<EpisodeAbort>,
    rounds: Vec<HistoryRecord>,
    streams: Vec<Vec<f64>>,
    mediator_proposals: Option<Vec<MediatorSpec>>,
    contract_proposals: Option<Vec<ContractSpec>>,
    ballots: Option<Vec<Vec<bool>>>,
    winning_proposal: Option<usize>,
    signatures: Option<Vec<bool>>,
    delegations: Option<Vec<bool>>,
    transfers: Option<Vec<f64>>,
}

impl<R: Rng + ?Sized> Run<'_, R> {
    /// Asks one agent. `Ok(None)` means the episode aborted (stored in
    /// `self.abort`); engine-level misuse is a hard error.
    fn decide(
        &mut self,
        agent: usize,
        request: &DecisionRequest<'_>,
    ) -> Result<Option<DecisionPayload>, EpisodeError> {
        match self.agents[agent].decide(request) {
            Ok(response) => {
                if response.payload.phase() != request.phase {
                    return Err(EpisodeError::BadPayload { agent, phase: request.phase });
                }
                Ok(Some(response.payload))
            }
            Err(err @ AgentError::ParseFailed { .. }) => {
                self.abort = Some(EpisodeAbort {
                    agent,
                    phase: request.phase,
                    transport: false,
                    message: err.to_string(),
                });
                Ok(None)
            }
            Err(err @ AgentError::Transport { .. }) => {
                self.abort = Some(EpisodeAbort {
                    agent,
                    phase: request.phase,
                    transport: true,
                    message: err.to_string(),
                });
                Ok(None)
            }
            Err(err) => Err(EpisodeError::Agent(err)),
        }
    }

    fn act(
        &mut self,
        agent: usize,
        request: &DecisionRequest<'_>,
    ) -> Result<Option<MixedAction>, EpisodeError> {
        match self.decide(agent, request)? {
            Some(DecisionPayload::Act(mix)) => {
                if mix.num_actions() != request.action_count() {
                    return Err(EpisodeError::BadPayload { agent, phase: Phase::Act });
                }
                Ok(Some(mix))
            }
            Some(_) => unreachable!("payload phase checked in decide"),
            None => Ok(None),
        }
    }

    /// Samples the round, scores it with `scoring`, and records it under
    /// the given participants. Returns the realized actions.
    fn resolve_round(
        &mut self,
        round: usize,
        participants: Vec<usize>,
        mixed: &StrategyProfile,
        scoring: &Game,
    ) -> Vec<usize> {
        let actions = sample_profile(mixed, self.rng);
        let payoffs = scoring.payoff_vector(&actions);
        for (seat, &id) in participants.iter().enumerate() {
            self.streams[id].push(payoffs[seat]);
        }
        self.rounds.push(HistoryRecord {
            round,
            participants,
            actions: actions.clone(),
            payoffs,
        });
        actions
    }

    /// One simultaneous round of the base game with no mechanism context.
    fn bare_round(&mut self) -> Result<Option<Vec<usize>>, EpisodeError> {
        let n = self.game.players();
        let mut mixed: StrategyProfile = Vec::with_capacity(n);
        for seat in 0..n {
            let request = DecisionRequest {
                game: self.game,
                seat,
                config: self.config,
                phase: Phase::Act,
                context: MechanismContext::None,
            };
            match self.act(seat, &request)? {
                Some(mix) => mixed.push(mix),
                None => return Ok(None),
            }
        }
        Ok(Some(self.resolve_round(1, (0..n).collect(), &mixed, self.game)))
    }

    fn one_shot(mut self) -> Result<EpisodeRecord, EpisodeError> {
        self.bare_round()?;
        Ok(self.finish())
    }

    fn repetition(mut self) -> Result<EpisodeRecord, EpisodeError> {
        let n = self.game.players();
        let mut log = ReputationLog::new();
        for round in 1..=self.config.horizon {
            let mut mixed: StrategyProfile = Vec::with_capacity(n);
            for seat in 0..n {
                let co: Vec<usize> = (0..n).filter(|&s| s != seat).collect();
                let view = build_history_view(
                    &log,
                    seat,
                    &co,
                    round,
                    self.config.window,
                    HistoryOrder::FirstOrder,
                );
                let request = DecisionRequest {
                    game: self.game,
                    seat,
                    config: self.config,
                    phase: Phase::Act,
                    context: MechanismContext::Repetition { view },
                };
                match self.act(seat, &request)? {
                    Some(mix) => mixed.push(mix),
                    None => return Ok(self.finish()),
                }
            }
            self.resolve_round(round, (0..n).collect(), &mixed, self.game);
            log.push(self.rounds.last().expect("round just recorded").clone());
        }
        Ok(self.finish())
    }

    fn reputation(mut self, order: HistoryOrder) -> Result<EpisodeRecord, EpisodeError> {
        let n = self.game.players();
        let pool = self.agents.len();
        let mut log = ReputationLog::new();
        for round in 1..=self.config.horizon {
            let mut ids: Vec<usize> = (0..pool).collect();
            ids.shuffle(self.rng);
            for group in ids.chunks(n) {
                let mut mixed: StrategyProfile = Vec::with_capacity(n);
                for (seat, &id) in group.iter().enumerate() {
                    let co: Vec<usize> =
                        group.iter().copied().filter(|&other| other != id).collect();
                    let view =
                        build_history_view(&log, id, &co, round, self.config.window, order);
                    let request = DecisionRequest {
                        game: self.game,
                        seat,
                        config: self.config,
                        phase: Phase::Act,
                        context: MechanismContext::Reputation { view },
                    };
                    match self.act(id, &request)? {
                        Some(mix) => mixed.push(mix),
                        None => return Ok(self.finish()),
                    }
                }
                self.resolve_round(round, group.to_vec(), &mixed, self.game);
                log.push(self.rounds.last().expect("round just recorded").clone());
            }
        }
        Ok(self.finish())
    }

    fn mediation(mut self) -> Result<EpisodeRecord, EpisodeError> {
        let n = self.game.players();
        let (delegate, _) = delegate_action(self.game)?;

        // Proposals are designed blind: nobody sees the other drafts.
        let mut proposals: Vec<MediatorSpec> = Vec::with_capacity(n);
        for seat in 0..n {
            let request = DecisionRequest {
                game: self.game,
                seat,
                config: self.config,
                phase: Phase::ProposeMediator,
                context: MechanismContext::None,
            };
            match self.decide(seat, &request)? {
                Some(DecisionPayload::Mediator(spec)) => {
                    // Revalidate against this game; deciders are untrusted.
                    let spec = MediatorSpec::new(spec.plan, self.game)?;
                    proposals.push(spec);
                }
                Some(_) => unreachable!("payload phase checked in decide"),
                None => return Ok(self.finish()),
            }
        }
        self.mediator_proposals = Some(proposals.clone());

        let ballots = match self.collect_ballots(MechanismContext::MediatorBallot {
            proposals: proposals.clone(),
        })? {
            Some(ballots) => ballots,
            None => return Ok(self.finish()),
        };
        let outcome = run_proposal_vote(n, &ballots, self.rng)?;
        self.ballots = Some(ballots);
        self.winning_proposal = Some(outcome.winner);
        let spec = proposals[outcome.winner].clone();

        let mut mixed: StrategyProfile = Vec::with_capacity(n);
        for seat in 0..n {
            let request = DecisionRequest {
                game: self.game,
                seat,
                config: self.config,
                phase: Phase::Act,
                context: MechanismContext::MediatorActive {
                    spec: spec.clone(),
                    proposer: outcome.winner,
                },
            };
            match self.act(seat, &request)? {
                Some(mix) => mixed.push(mix),
                None => return Ok(self.finish()),
            }
        }
        let chosen = sample_profile(&mixed, self.rng);
        let delegators: Vec<usize> = (0..n).filter(|&s| chosen[s] == delegate).collect();
        self.delegations = Some((0..n).map(|s| chosen[s] == delegate).collect());

        // The mediator resolves every delegated choice with one draw from
        // its plan for that delegator count; payoffs come from the base
        // game on the resolved profile.
        let mut resolved = chosen;
        if !delegators.is_empty() {
            let planned = spec.for_delegators(delegators.len()).sample(self.rng);
            for &d in &delegators {
                resolved[d] = planned;
            }
        }
        let payoffs = self.game.payoff_vector(&resolved);
        for (seat, &p) in payoffs.iter().enumerate() {
            self.streams[seat].push(p);
        }
        self.rounds.push(HistoryRecord {
            round: 1,
            participants: (0..n).collect(),
            actions: resolved,
            payoffs,
        });
        Ok(self.finish())
    }

    fn contracting(mut self) -> Result<EpisodeRecord, EpisodeError> {
        let n = self.game.players();

        let mut proposals: Vec<ContractSpec> = Vec::with_capacity(n);
        for seat in 0..n {
            let request = DecisionRequest {
                game: self.game,
                seat,
                config: self.config,
                phase: Phase::ProposeContract,
                context: MechanismContext::None,
            };
            match self.decide(seat, &request)? {
                Some(DecisionPayload::Contract(spec)) => {
                    let spec = ContractSpec::new(spec.transfers, self.game)?;
                    proposals.push(spec);
                }
                Some(_) => unreachable!("payload phase checked in decide"),
                None => return Ok(self.finish()),
            }
        }
        self.contract_proposals = Some(proposals.clone());

        let ballots = match self.collect_ballots(MechanismContext::ContractBallot {
            proposals: proposals.clone(),
        })? {
            Some(ballots) => ballots,
            None => return Ok(self.finish()),
        };
        let outcome = run_proposal_vote(n, &ballots, self.rng)?;
        self.ballots = Some(ballots);
        self.winning_proposal = Some(outcome.winner);
        let spec = proposals[outcome.winner].clone();

        // Signatures are simultaneous; nobody sees anyone else's pen.
        let mut signatures: Vec<bool> = Vec::with_capacity(n);
        for seat in 0..n {
            let request = DecisionRequest {
                game: self.game,
                seat,
                config: self.config,
                phase: Phase::Sign,
                context: MechanismContext::ContractOffer {
                    spec: spec.clone(),
                    proposer: outcome.winner,
                },
            };
            match self.decide(seat, &request)? {
                Some(DecisionPayload::Sign(choice)) => signatures.push(choice),
                Some(_) => unreachable!("payload phase checked in decide"),
                None => return Ok(self.finish()),
            }
        }
        let unanimous = signatures.iter().all(|&s| s);
        self.signatures = Some(signatures);

        if unanimous {
            let transformed = apply_contract(self.game, &spec)?;
            let mut mixed: StrategyProfile = Vec::with_capacity(n);
            for seat in 0..n {
                let request = DecisionRequest {
                    game: self.game,
                    seat,
                    config: self.config,
                    phase: Phase::Act,
                    context: MechanismContext::ContractActive {
                        spec: spec.clone(),
                        proposer: outcome.winner,
                    },
                };
                match self.act(seat, &request)? {
                    Some(mix) => mixed.push(mix),
                    None => return Ok(self.finish()),
                }
            }
            let actions = self.resolve_round(1, (0..n).collect(), &mixed, &transformed);
            self.transfers = Some(spec.transfer_vector(&actions));
        } else {
            // The contract never activated; the base game is played bare.
            self.bare_round()?;
        }
        Ok(self.finish())
    }

    fn collect_ballots(
        &mut self,
        context: MechanismContext,
    ) -> Result<Option<Vec<Vec<bool>>>, EpisodeError> {
        let n = self.game.players();
        let mut ballots: Vec<Vec<bool>> = Vec::with_capacity(n);
        for seat in 0..n {
            let request = DecisionRequest {
                game: self.game,
                seat,
                config: self.config,
                phase: Phase::Vote,
                context: context.clone(),
            };
            match self.decide(seat, &request)? {
                Some(DecisionPayload::Vote(ballot)) => {
                    if ballot.len() != n {
                        return Err(EpisodeError::BadPayload { agent: seat, phase: Phase::Vote });
                    }
                    ballots.push(ballot);
                }
                Some(_) => unreachable!("payload phase checked in decide"),
                None => return Ok(None),
            }
        }
        Ok(Some(ballots))
    }

    fn finish(self) -> EpisodeRecord {
        let status = match self.abort {
            Some(abort) => EpisodeStatus::Aborted(abort),
            None => EpisodeStatus::Completed,
        };
        let weighted_payoffs = if status == EpisodeStatus::Completed {
            self.streams
                .iter()
                .map(|stream| repetition_weighted_payoff(stream, self.config.delta))
                .collect()
        } else {
            Vec::new()
        };
        EpisodeRecord {
            config: self.config.clone(),
            mediator_proposals: self.mediator_proposals,
            contract_proposals: self.contract_proposals,
            ballots: self.ballots,
            winning_proposal: self.winning_proposal,
            signatures: self.signatures,
            delegations: self.delegations,
            transfers: self.transfers,
            rounds: self.rounds,
            round_payoffs: self.streams,
            weighted_payoffs,
            status,
        }
    }
}
