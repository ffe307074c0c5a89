//! The scripted agent library: deterministic rules that answer the same
//! request contract as external agents. Each rule has a home turf — copy
//! strategies and triggers for the repeated variants, standing labels for
//! random matching, the designer agents for mediation and contracting —
//! and a declared default everywhere else: propose nothing binding (an
//! all-zero contract, an always-cooperate mediator plan), approve every
//! ballot entry, sign, and act by its own base rule.

use std::collections::{BTreeMap, BTreeSet};

use crate::equilibrium::is_pure_nash;
use crate::game::MixedAction;
use crate::history::{HistoryRecord, HistoryTree, HistoryView};
use crate::mechanism::{apply_contract, augment_with_mediator, ContractSpec, MediatorSpec};

use super::wire::canonical_wire;
use super::{
    AgentError, AgentKind, DecisionPayload, DecisionRequest, Decider, DecisionResponse,
    MechanismContext, Phase,
};

/// A scripted participant. Construct one per episode and seat: trigger and
/// standing state accumulate across the rounds of a single episode and
/// must not leak between episodes.
#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    kind: AgentKind,
    /// GrimTrigger: set once any visible record deviates from coop.
    trigger_fired: bool,
    /// StandingNorm: agent id → still in good standing? Absent means good.
    standing: BTreeMap<usize, bool>,
    /// StandingNorm: rounds up to here are already folded into the labels.
    standing_seen_through: usize,
}

impl ScriptedAgent {
    pub fn new(kind: AgentKind) -> Result<Self, AgentError> {
        if !kind.is_scripted() {
            return Err(AgentError::NeedsTransport { kind: kind.to_string() });
        }
        Ok(Self {
            kind,
            trigger_fired: false,
            standing: BTreeMap::new(),
            standing_seen_through: 0,
        })
    }

    pub fn kind(&self) -> &AgentKind {
        &self.kind
    }

    fn propose_mediator(&self, req: &DecisionRequest<'_>) -> Result<MediatorSpec, AgentError> {
        let game = req.game;
        if self.kind == AgentKind::CooperativeMediator {
            return Ok(MediatorSpec::cooperative(game)?);
        }
        // Default design: play the cooperative action no matter how many
        // players delegate. Harmless, and never punishes anyone.
        let coop = game.coop_profile()[0];
        let m = game.num_actions(0);
        let plan = vec![MixedAction::pure(coop, m); game.players()];
        Ok(MediatorSpec::new(plan, game)?)
    }

    fn propose_contract(&self, req: &DecisionRequest<'_>) -> Result<ContractSpec, AgentError> {
        if self.kind == AgentKind::CooperativeContractor {
            return Ok(ContractSpec::cooperative(req.game)?);
        }
        Ok(ContractSpec::identity(req.game)?)
    }

    fn vote(&self, req: &DecisionRequest<'_>) -> Result<Vec<bool>, AgentError> {
        let game = req.game;
        match &req.context {
            MechanismContext::MediatorBallot { proposals } => match self.kind {
                AgentKind::CooperativeMediator => {
                    let target = MediatorSpec::cooperative(game)?;
                    Ok(proposals.iter().map(|p| *p == target).collect())
                }
                AgentKind::BestResponseVoter => {
                    let delegate = game.num_actions(0);
                    let everyone = vec![delegate; game.players()];
                    let mut approvals = Vec::with_capacity(proposals.len());
                    for spec in proposals {
                        let augmented = augment_with_mediator(game, spec)?;
                        approvals.push(is_pure_nash(&augmented, &everyone));
                    }
                    Ok(approvals)
                }
                _ => Ok(vec![true; proposals.len()]),
            },
            MechanismContext::ContractBallot { proposals } => match self.kind {
                AgentKind::CooperativeContractor => {
                    let target = ContractSpec::cooperative(game)?;
                    Ok(proposals.iter().map(|p| *p == target).collect())
                }
                AgentKind::BestResponseVoter => {
                    let mut approvals = Vec::with_capacity(proposals.len());
                    for spec in proposals {
                        let adjusted = apply_contract(game, spec)?;
                        approvals.push(is_pure_nash(&adjusted, game.coop_profile()));
                    }
                    Ok(approvals)
                }
                _ => Ok(vec![true; proposals.len()]),
            },
            // validate() rules this out.
            _ => Ok(Vec::new()),
        }
    }

    fn sign(&self, req: &DecisionRequest<'_>) -> Result<bool, AgentError> {
        if self.kind != AgentKind::CooperativeContractor {
            return Ok(true);
        }
        match &req.context {
            MechanismContext::ContractOffer { spec, .. } => {
                Ok(*spec == ContractSpec::cooperative(req.game)?)
            }
            _ => Ok(true),
        }
    }

    fn act(&mut self, req: &DecisionRequest<'_>) -> Result<MixedAction, AgentError> {
        let game = req.game;
        let count = req.action_count();
        let coop = game.coop_profile()[req.seat];
        let defect = game.defect_profile()[req.seat];
        let play = |action: usize| MixedAction::pure(action, count);

        match &self.kind {
            AgentKind::AlwaysCooperate => Ok(play(coop)),
            AgentKind::AlwaysDefect => Ok(play(defect)),
            AgentKind::Always { action } => {
                if *action >= count {
                    return Err(AgentError::ActionOutOfRange { action: *action, available: count });
                }
                Ok(play(*action))
            }
            AgentKind::UniformRandom => Ok(MixedAction::uniform(count)),
            AgentKind::TitForTat => Ok(play(self.tit_for_tat(req, coop, defect))),
            AgentKind::GrimTrigger => {
                if let Some(view) = context_view(req) {
                    for record in visible_records(view) {
                        for (seat, &action) in record.actions.iter().enumerate() {
                            if action != game.coop_profile()[seat] {
                                self.trigger_fired = true;
                            }
                        }
                    }
                }
                Ok(play(if self.trigger_fired { defect } else { coop }))
            }
            AgentKind::StandingNorm => Ok(play(self.standing_action(req, coop, defect))),
            AgentKind::CooperativeMediator => match &req.context {
                MechanismContext::MediatorActive { spec, .. } => {
                    if *spec == MediatorSpec::cooperative(game)? {
                        Ok(play(game.num_actions(req.seat)))
                    } else {
                        Ok(play(defect))
                    }
                }
                _ => Ok(play(defect)),
            },
            AgentKind::CooperativeContractor => match &req.context {
                MechanismContext::ContractActive { spec, .. } => {
                    if *spec == ContractSpec::cooperative(game)? {
                        Ok(play(coop))
                    } else {
                        Ok(play(defect))
                    }
                }
                _ => Ok(play(defect)),
            },
            // Myopic equilibrium play: cooperate exactly when the mechanism
            // in force makes the cooperative outcome self-enforcing.
            AgentKind::BestResponseVoter => match &req.context {
                MechanismContext::MediatorActive { spec, .. } => {
                    let augmented = augment_with_mediator(game, spec)?;
                    let delegate = game.num_actions(req.seat);
                    let everyone = vec![delegate; game.players()];
                    Ok(play(if is_pure_nash(&augmented, &everyone) { delegate } else { defect }))
                }
                MechanismContext::ContractActive { spec, .. } => {
                    let adjusted = apply_contract(game, spec)?;
                    Ok(play(if is_pure_nash(&adjusted, game.coop_profile()) {
                        coop
                    } else {
                        defect
                    }))
                }
                _ => Ok(play(defect)),
            },
            AgentKind::External { .. } => {
                Err(AgentError::NeedsTransport { kind: self.kind.to_string() })
            }
        }
    }

    /// Copy the co-player's last visible action; with several co-players,
    /// cooperate iff all of them cooperated. No visible history means
    /// cooperate.
    fn tit_for_tat(&self, req: &DecisionRequest<'_>, coop: usize, defect: usize) -> usize {
        let game = req.game;
        match &req.context {
            MechanismContext::Repetition { view } => {
                let Some(node) = view.own.nodes.first() else { return coop };
                let record = &node.record;
                let others: Vec<usize> = (0..record.participants.len())
                    .filter(|&i| record.participants[i] != view.own.subject)
                    .collect();
                if game.players() == 2 {
                    others.first().map_or(coop, |&i| record.actions[i])
                } else if others.iter().all(|&i| record.actions[i] == game.coop_profile()[i]) {
                    coop
                } else {
                    defect
                }
            }
            MechanismContext::Reputation { view } => {
                // Judge each co-player by the latest action in their own
                // tree; an empty tree counts as cooperative.
                let latest: Vec<Option<usize>> = view
                    .others
                    .iter()
                    .map(|tree| {
                        tree.nodes.first().map(|node| {
                            let seat = node.record.seat_of(tree.subject).expect("own record");
                            node.record.actions[seat]
                        })
                    })
                    .collect();
                if game.players() == 2 {
                    latest.first().copied().flatten().unwrap_or(coop)
                } else {
                    let all_coop = view.others.iter().zip(&latest).all(|(tree, action)| {
                        match action {
                            None => true,
                            Some(a) => {
                                let node = tree.nodes.first().expect("action came from a node");
                                let seat = node.record.seat_of(tree.subject).expect("own record");
                                *a == game.coop_profile()[seat]
                            }
                        }
                    });
                    if all_coop {
                        coop
                    } else {
                        defect
                    }
                }
            }
            _ => coop,
        }
    }

    /// Fold newly visible rounds into the standing labels, then cooperate
    /// iff every current co-player is still in good standing.
    fn standing_action(&mut self, req: &DecisionRequest<'_>, coop: usize, defect: usize) -> usize {
        let Some(view) = context_view(req) else { return coop };
        let game = req.game;

        let mut fresh: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        let mut records: Vec<&HistoryRecord> = Vec::new();
        for record in visible_records(view) {
            if record.round > self.standing_seen_through
                && fresh.insert((record.round, record.participants.clone()))
            {
                records.push(record);
            }
        }
        records.sort_by_key(|r| r.round);

        // Per round, judge deviations against the labels as they stood
        // when the round was played: everyone in a batch moved at once.
        let mut i = 0;
        while i < records.len() {
            let round = records[i].round;
            let before = self.standing.clone();
            while i < records.len() && records[i].round == round {
                let record = records[i];
                for (seat, &agent) in record.participants.iter().enumerate() {
                    if record.actions[seat] == game.coop_profile()[seat] {
                        continue;
                    }
                    let others_good = record
                        .participants
                        .iter()
                        .enumerate()
                        .all(|(j, q)| j == seat || *before.get(q).unwrap_or(&true));
                    if others_good {
                        self.standing.insert(agent, false);
                    }
                }
                i += 1;
            }
            self.standing_seen_through = self.standing_seen_through.max(round);
        }

        let co_players_good = view
            .co_players
            .iter()
            .all(|c| *self.standing.get(c).unwrap_or(&true));
        if co_players_good {
            coop
        } else {
            defect
        }
    }
}

impl Decider for ScriptedAgent {
    fn decide(&mut self, req: &DecisionRequest<'_>) -> Result<DecisionResponse, AgentError> {
        req.validate()?;
        let payload = match req.phase {
            Phase::Act => DecisionPayload::Act(self.act(req)?),
            Phase::ProposeMediator => DecisionPayload::Mediator(self.propose_mediator(req)?),
            Phase::ProposeContract => DecisionPayload::Contract(self.propose_contract(req)?),
            Phase::Vote => DecisionPayload::Vote(self.vote(req)?),
            Phase::Sign => DecisionPayload::Sign(self.sign(req)?),
        };
        let raw = canonical_wire(req, &payload);
        Ok(DecisionResponse { payload, raw })
    }
}

fn context_view<'r>(req: &'r DecisionRequest<'_>) -> Option<&'r HistoryView> {
    match &req.context {
        MechanismContext::Repetition { view } | MechanismContext::Reputation { view } => {
            Some(view)
        }
        _ => None,
    }
}

/// Every record in the view, at any nesting depth, own tree first.
fn visible_records(view: &HistoryView) -> Vec<&HistoryRecord> {
    let mut out = Vec::new();
    collect_records(&view.own, &mut out);
    for tree in &view.others {
        collect_records(tree, &mut out);
    }
    out
}

fn collect_records<'t>(tree: &'t HistoryTree, out: &mut Vec<&'t HistoryRecord>) {
    for node in &tree.nodes {
        out.push(&node.record);
        for expansion in &node.expansions {
            collect_records(expansion, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Game;
    use crate::history::{build_history_view, HistoryOrder, ReputationLog};
    use crate::mechanism::{MechanismConfig, MechanismVariant};
    use crate::agent::wire::parse_response;

    fn record(round: usize, participants: Vec<usize>, actions: Vec<usize>) -> HistoryRecord {
        // Payoffs don't influence any scripted rule; zeros keep fixtures short.
        let payoffs = vec![0.0; participants.len()];
        HistoryRecord { round, participants, actions, payoffs }
    }

    fn one_shot<'a>(game: &'a Game, config: &'a MechanismConfig) -> DecisionRequest<'a> {
        DecisionRequest {
            game,
            seat: 0,
            config,
            phase: Phase::Act,
            context: MechanismContext::None,
        }
    }

    fn act_weights(agent: &mut ScriptedAgent, req: &DecisionRequest<'_>) -> Vec<u32> {
        match agent.decide(req).unwrap().payload {
            DecisionPayload::Act(mix) => mix.weights().to_vec(),
            other => panic!("expected an action, got {other:?}"),
        }
    }

    #[test]
    fn fixed_rules_play_their_action() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let req = one_shot(&game, &config);

        let mut coop = ScriptedAgent::new(AgentKind::AlwaysCooperate).unwrap();
        assert_eq!(act_weights(&mut coop, &req), vec![100, 0]);
        let mut defect = ScriptedAgent::new(AgentKind::AlwaysDefect).unwrap();
        assert_eq!(act_weights(&mut defect, &req), vec![0, 100]);
        let mut fixed = ScriptedAgent::new(AgentKind::Always { action: 1 }).unwrap();
        assert_eq!(act_weights(&mut fixed, &req), vec![0, 100]);
        let mut random = ScriptedAgent::new(AgentKind::UniformRandom).unwrap();
        assert_eq!(act_weights(&mut random, &req), vec![50, 50]);

        let mut way_off = ScriptedAgent::new(AgentKind::Always { action: 7 }).unwrap();
        assert!(matches!(
            way_off.decide(&req),
            Err(AgentError::ActionOutOfRange { action: 7, available: 2 })
        ));
    }

    #[test]
    fn tit_for_tat_copies_the_partners_last_action() {
        let game = Game::travelers();
        let config = MechanismConfig::new(MechanismVariant::Repetition);
        let mut agent = ScriptedAgent::new(AgentKind::TitForTat).unwrap();

        // Round 1: nothing to copy, open with the cooperative claim (A3).
        let empty = ReputationLog::new();
        let view = build_history_view(&empty, 0, &[1], 1, 3, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        assert_eq!(act_weights(&mut agent, &req), vec![0, 0, 0, 100]);

        // Partner claimed A2 last round: claim A2 back.
        let mut log = ReputationLog::new();
        log.push(record(1, vec![0, 1], vec![3, 2]));
        let view = build_history_view(&log, 0, &[1], 2, 3, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        assert_eq!(act_weights(&mut agent, &req), vec![0, 0, 100, 0]);
    }

    #[test]
    fn tit_for_tat_with_a_group_needs_unanimous_cooperation() {
        let game = Game::public_goods(Default::default()).unwrap();
        let config = MechanismConfig::new(MechanismVariant::Repetition);
        let mut agent = ScriptedAgent::new(AgentKind::TitForTat).unwrap();

        let mut log = ReputationLog::new();
        log.push(record(1, vec![0, 1, 2], vec![0, 0, 1]));
        let view = build_history_view(&log, 0, &[1, 2], 2, 3, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        // Player 3 free-rode: withhold.
        assert_eq!(act_weights(&mut agent, &req), vec![0, 100]);

        let mut log = ReputationLog::new();
        log.push(record(1, vec![0, 1, 2], vec![0, 0, 0]));
        let view = build_history_view(&log, 0, &[1, 2], 2, 3, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        assert_eq!(act_weights(&mut agent, &req), vec![100, 0]);
    }

    #[test]
    fn grim_trigger_latches_forever() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::Repetition);
        let mut agent = ScriptedAgent::new(AgentKind::GrimTrigger).unwrap();

        let mut log = ReputationLog::new();
        log.push(record(1, vec![0, 1], vec![0, 0]));
        log.push(record(2, vec![0, 1], vec![0, 0]));
        let view = build_history_view(&log, 0, &[1], 3, 3, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        // Clean history: keep cooperating.
        assert_eq!(act_weights(&mut agent, &req), vec![100, 0]);

        // One defection fires the trigger...
        log.push(record(3, vec![0, 1], vec![0, 1]));
        let view = build_history_view(&log, 0, &[1], 4, 3, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        assert_eq!(act_weights(&mut agent, &req), vec![0, 100]);

        // ...and stays fired even once the defection ages out of the window.
        for round in 4..=8 {
            log.push(record(round, vec![0, 1], vec![0, 0]));
        }
        let view = build_history_view(&log, 0, &[1], 9, 3, HistoryOrder::FirstOrder);
        assert!(view
            .own
            .nodes
            .iter()
            .all(|n| n.record.actions == vec![0, 0]));
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        assert_eq!(act_weights(&mut agent, &req), vec![0, 100]);
    }

    #[test]
    fn standing_norm_tracks_justified_punishment() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::ReputationPlus);
        let mut agent = ScriptedAgent::new(AgentKind::StandingNorm).unwrap();

        // Round 1: agent 5 defects on a good co-player — 5 loses standing.
        // Round 2: agent 8 defects on the now-bad 5 — justified, 8 stays good.
        let mut log = ReputationLog::new();
        log.push(record(1, vec![5, 6], vec![1, 0]));
        log.push(record(2, vec![8, 5], vec![1, 0]));

        let view = build_history_view(&log, 0, &[5], 3, 10, HistoryOrder::HigherOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Reputation { view },
        };
        assert_eq!(act_weights(&mut agent, &req), vec![0, 100], "punish the defector");

        let view = build_history_view(&log, 0, &[8], 4, 10, HistoryOrder::HigherOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Reputation { view },
        };
        assert_eq!(
            act_weights(&mut agent, &req),
            vec![100, 0],
            "justified punishment keeps good standing"
        );
    }

    #[test]
    fn designer_agents_propose_their_construction_and_hold_the_line() {
        let game = Game::prisoners();
        let med_config = MechanismConfig::new(MechanismVariant::Mediation);
        let con_config = MechanismConfig::new(MechanismVariant::Contracting);
        let mu = MediatorSpec::cooperative(&game).unwrap();
        let chi = ContractSpec::cooperative(&game).unwrap();
        let naive_plan = MediatorSpec::new(
            vec![MixedAction::pure(0, 2), MixedAction::pure(0, 2)],
            &game,
        )
        .unwrap();

        let mut mediator = ScriptedAgent::new(AgentKind::CooperativeMediator).unwrap();
        let propose = DecisionRequest {
            game: &game,
            seat: 0,
            config: &med_config,
            phase: Phase::ProposeMediator,
            context: MechanismContext::None,
        };
        assert_eq!(
            mediator.decide(&propose).unwrap().payload,
            DecisionPayload::Mediator(mu.clone())
        );

        let vote = DecisionRequest {
            game: &game,
            seat: 0,
            config: &med_config,
            phase: Phase::Vote,
            context: MechanismContext::MediatorBallot {
                proposals: vec![naive_plan.clone(), mu.clone()],
            },
        };
        assert_eq!(
            mediator.decide(&vote).unwrap().payload,
            DecisionPayload::Vote(vec![false, true])
        );

        let act_good = DecisionRequest {
            game: &game,
            seat: 0,
            config: &med_config,
            phase: Phase::Act,
            context: MechanismContext::MediatorActive { spec: mu.clone(), proposer: 1 },
        };
        assert_eq!(act_weights(&mut mediator, &act_good), vec![0, 0, 100], "delegate");
        let act_bad = DecisionRequest {
            game: &game,
            seat: 0,
            config: &med_config,
            phase: Phase::Act,
            context: MechanismContext::MediatorActive { spec: naive_plan, proposer: 1 },
        };
        assert_eq!(act_weights(&mut mediator, &act_bad), vec![0, 100, 0], "act alone");

        let mut contractor = ScriptedAgent::new(AgentKind::CooperativeContractor).unwrap();
        let propose = DecisionRequest {
            game: &game,
            seat: 0,
            config: &con_config,
            phase: Phase::ProposeContract,
            context: MechanismContext::None,
        };
        assert_eq!(
            contractor.decide(&propose).unwrap().payload,
            DecisionPayload::Contract(chi.clone())
        );

        let identity = ContractSpec::identity(&game).unwrap();
        let sign_good = DecisionRequest {
            game: &game,
            seat: 0,
            config: &con_config,
            phase: Phase::Sign,
            context: MechanismContext::ContractOffer { spec: chi.clone(), proposer: 0 },
        };
        assert_eq!(contractor.decide(&sign_good).unwrap().payload, DecisionPayload::Sign(true));
        let sign_bad = DecisionRequest {
            game: &game,
            seat: 0,
            config: &con_config,
            phase: Phase::Sign,
            context: MechanismContext::ContractOffer { spec: identity.clone(), proposer: 0 },
        };
        assert_eq!(contractor.decide(&sign_bad).unwrap().payload, DecisionPayload::Sign(false));

        let act_good = DecisionRequest {
            game: &game,
            seat: 0,
            config: &con_config,
            phase: Phase::Act,
            context: MechanismContext::ContractActive { spec: chi, proposer: 0 },
        };
        assert_eq!(act_weights(&mut contractor, &act_good), vec![100, 0]);
        let act_bare = DecisionRequest {
            game: &game,
            seat: 0,
            config: &con_config,
            phase: Phase::Act,
            context: MechanismContext::None,
        };
        assert_eq!(act_weights(&mut contractor, &act_bare), vec![0, 100]);
    }

    #[test]
    fn best_response_voter_approves_exactly_self_enforcing_proposals() {
        let game = Game::prisoners();
        let med_config = MechanismConfig::new(MechanismVariant::Mediation);
        let con_config = MechanismConfig::new(MechanismVariant::Contracting);
        let mut voter = ScriptedAgent::new(AgentKind::BestResponseVoter).unwrap();

        let mu = MediatorSpec::cooperative(&game).unwrap();
        // Always-cooperate plans invite free riding: not self-enforcing.
        let naive = MediatorSpec::new(
            vec![MixedAction::pure(0, 2), MixedAction::pure(0, 2)],
            &game,
        )
        .unwrap();
        let vote = DecisionRequest {
            game: &game,
            seat: 0,
            config: &med_config,
            phase: Phase::Vote,
            context: MechanismContext::MediatorBallot { proposals: vec![mu, naive] },
        };
        assert_eq!(
            voter.decide(&vote).unwrap().payload,
            DecisionPayload::Vote(vec![true, false])
        );

        let chi = ContractSpec::cooperative(&game).unwrap();
        let identity = ContractSpec::identity(&game).unwrap();
        let vote = DecisionRequest {
            game: &game,
            seat: 0,
            config: &con_config,
            phase: Phase::Vote,
            context: MechanismContext::ContractBallot { proposals: vec![identity, chi] },
        };
        assert_eq!(
            voter.decide(&vote).unwrap().payload,
            DecisionPayload::Vote(vec![false, true])
        );
    }

    #[test]
    fn every_scripted_kind_answers_every_phase_with_a_valid_wire_shape() {
        let kinds = [
            AgentKind::AlwaysCooperate,
            AgentKind::AlwaysDefect,
            AgentKind::Always { action: 1 },
            AgentKind::UniformRandom,
            AgentKind::TitForTat,
            AgentKind::GrimTrigger,
            AgentKind::StandingNorm,
            AgentKind::CooperativeMediator,
            AgentKind::CooperativeContractor,
            AgentKind::BestResponseVoter,
        ];
        for game in [Game::prisoners(), Game::public_goods(Default::default()).unwrap()] {
            for kind in &kinds {
                for (config, phase, context) in engine_shapes(&game) {
                    let req = DecisionRequest {
                        game: &game,
                        seat: 0,
                        config: &config,
                        phase,
                        context,
                    };
                    let mut agent = ScriptedAgent::new(kind.clone()).unwrap();
                    let response = agent
                        .decide(&req)
                        .unwrap_or_else(|e| panic!("{kind} failed {phase}: {e}"));
                    assert_eq!(response.payload.phase(), phase, "{kind}");
                    // The transcript it logs must parse back to the payload.
                    let raw = response.raw.expect("scripted agents log wire shapes");
                    assert_eq!(parse_response(&req, &raw).unwrap(), response.payload, "{kind}");
                    if let DecisionPayload::Act(mix) = &response.payload {
                        assert_eq!(mix.num_actions(), req.action_count(), "{kind}");
                    }
                }
            }
        }
    }

    /// Every (variant, phase, context) shape the episode engine produces.
    fn engine_shapes(game: &Game) -> Vec<(MechanismConfig, Phase, MechanismContext)> {
        let n = game.players();
        let mut log = ReputationLog::new();
        log.push(record(1, (0..n).collect(), vec![0; n]));
        log.push(record(2, (0..n).collect(), game.defect_profile().to_vec()));
        let co_players: Vec<usize> = (1..n).collect();
        let rep_view = build_history_view(&log, 0, &co_players, 3, 3, HistoryOrder::FirstOrder);
        let tree_view = build_history_view(&log, 0, &co_players, 3, 3, HistoryOrder::HigherOrder);

        let mu = MediatorSpec::cooperative(game).unwrap();
        let chi = ContractSpec::cooperative(game).unwrap();
        let identity = ContractSpec::identity(game).unwrap();

        vec![
            (
                MechanismConfig::new(MechanismVariant::NoMechanism),
                Phase::Act,
                MechanismContext::None,
            ),
            (
                MechanismConfig::new(MechanismVariant::Repetition),
                Phase::Act,
                MechanismContext::Repetition { view: rep_view },
            ),
            (
                MechanismConfig::new(MechanismVariant::ReputationMinus),
                Phase::Act,
                MechanismContext::Reputation { view: tree_view.clone() },
            ),
            (
                MechanismConfig::new(MechanismVariant::ReputationPlus),
                Phase::Act,
                MechanismContext::Reputation { view: tree_view },
            ),
            (
                MechanismConfig::new(MechanismVariant::Mediation),
                Phase::ProposeMediator,
                MechanismContext::None,
            ),
            (
                MechanismConfig::new(MechanismVariant::Mediation),
                Phase::Vote,
                MechanismContext::MediatorBallot { proposals: vec![mu.clone(); n] },
            ),
            (
                MechanismConfig::new(MechanismVariant::Mediation),
                Phase::Act,
                MechanismContext::MediatorActive { spec: mu, proposer: 0 },
            ),
            (
                MechanismConfig::new(MechanismVariant::Contracting),
                Phase::ProposeContract,
                MechanismContext::None,
            ),
            (
                MechanismConfig::new(MechanismVariant::Contracting),
                Phase::Vote,
                MechanismContext::ContractBallot {
                    proposals: vec![identity.clone(), chi.clone()],
                },
            ),
            (
                MechanismConfig::new(MechanismVariant::Contracting),
                Phase::Sign,
                MechanismContext::ContractOffer { spec: chi.clone(), proposer: 1 },
            ),
            (
                MechanismConfig::new(MechanismVariant::Contracting),
                Phase::Act,
                MechanismContext::ContractActive { spec: chi, proposer: 1 },
            ),
            (
                MechanismConfig::new(MechanismVariant::Contracting),
                Phase::Act,
                MechanismContext::None,
            ),
        ]
    }
}
