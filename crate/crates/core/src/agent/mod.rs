//! The agent decision layer.
//!
//! Every participant in an episode — scripted rule or model behind a chat
//! transport — answers the same contract: the engine hands it a
//! [`DecisionRequest`] describing one decision point (which game, which
//! seat, which phase, what it may see) and gets back a [`DecisionResponse`]
//! whose payload matches the phase. Scripted agents compute the payload
//! directly; external agents go through prompt rendering, a chat transport,
//! and wire-format parsing.

pub mod prompt;
pub mod scripted;
pub mod transport;
pub mod wire;

pub use scripted::ScriptedAgent;
pub use transport::{
    CannedTransport, ChatMessage, ChatTransport, ExternalAgent, Role, SamplingParams,
    TransportError,
};
pub use wire::WireError;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Game, GameError, MixedAction};
use crate::history::HistoryView;
use crate::mechanism::{
    delegate_action, ContractSpec, MechanismConfig, MechanismError, MechanismVariant, MediatorSpec,
};

/// What kind of answer a request is asking for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Pick a mixed action for the (possibly augmented) game.
    Act,
    /// Design a mediator plan.
    ProposeMediator,
    /// Design a payment contract.
    ProposeContract,
    /// Approve or reject each proposal on a ballot.
    Vote,
    /// Accept or refuse the winning contract.
    Sign,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Act => "act",
            Phase::ProposeMediator => "propose_mediator",
            Phase::ProposeContract => "propose_contract",
            Phase::Vote => "vote",
            Phase::Sign => "sign",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a decision point exposes beyond the base game: history under
/// the repeated variants, ballot slates while voting, the winning proposal
/// once one is in force. `None` is the empty context of a plain one-shot
/// round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MechanismContext {
    None,
    /// Fixed-partner play: the window of past group rounds.
    Repetition { view: HistoryView },
    /// Random-matching play: own and co-player history trees.
    Reputation { view: HistoryView },
    /// Vote phase under mediation: one proposal per seat, in seat order.
    MediatorBallot { proposals: Vec<MediatorSpec> },
    /// Act phase under mediation: the elected mediator and who proposed it.
    MediatorActive { spec: MediatorSpec, proposer: usize },
    /// Vote phase under contracting: one proposal per seat, in seat order.
    ContractBallot { proposals: Vec<ContractSpec> },
    /// Sign phase: the elected contract awaiting signatures.
    ContractOffer { spec: ContractSpec, proposer: usize },
    /// Act phase with a fully signed contract in force.
    ContractActive { spec: ContractSpec, proposer: usize },
}

/// One decision point, as seen by the agent occupying `seat`.
///
/// `game` is always the untransformed base game; mechanism effects (the
/// delegate action, contract payments) are described by the context and the
/// rendered prompt rather than baked into the tensor the agent sees.
#[derive(Debug, Clone)]
pub struct DecisionRequest<'a> {
    pub game: &'a Game,
    /// 0-based seat; rendered as "Player {seat + 1}".
    pub seat: usize,
    pub config: &'a MechanismConfig,
    pub phase: Phase,
    pub context: MechanismContext,
}

impl<'a> DecisionRequest<'a> {
    /// Number of actions the answer must cover: the base action count, plus
    /// the delegate action when acting under an elected mediator.
    pub fn action_count(&self) -> usize {
        let base = self.game.num_actions(self.seat);
        match (self.phase, &self.context) {
            (Phase::Act, MechanismContext::MediatorActive { .. }) => base + 1,
            _ => base,
        }
    }

    /// Wire labels for the actions the answer must cover, in order.
    pub fn action_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .game
            .action_labels(self.seat)
            .iter()
            .map(|a| a.label.clone())
            .collect();
        if let (Phase::Act, MechanismContext::MediatorActive { .. }) = (self.phase, &self.context)
        {
            if let Ok((_, label)) = delegate_action(self.game) {
                labels.push(label);
            }
        }
        labels
    }

    /// Checks the phase/variant/context combination is one the engine can
    /// actually produce (context fields present exactly when the phase
    /// needs them).
    pub fn validate(&self) -> Result<(), AgentError> {
        use MechanismContext as C;
        use MechanismVariant as V;
        if self.seat >= self.game.players() {
            return Err(AgentError::BadSeat { seat: self.seat, players: self.game.players() });
        }
        let v = self.config.variant;
        let ok = match self.phase {
            Phase::Act => matches!(
                (v, &self.context),
                (V::NoMechanism, C::None)
                    | (V::Repetition, C::Repetition { .. })
                    | (V::ReputationMinus | V::ReputationPlus, C::Reputation { .. })
                    | (V::Mediation, C::MediatorActive { .. })
                    // When signing fell through the round is played bare.
                    | (V::Contracting, C::ContractActive { .. } | C::None)
            ),
            Phase::ProposeMediator => {
                v == V::Mediation && matches!(self.context, C::None)
            }
            Phase::ProposeContract => {
                v == V::Contracting && matches!(self.context, C::None)
            }
            Phase::Vote => matches!(
                (v, &self.context),
                (V::Mediation, C::MediatorBallot { .. })
                    | (V::Contracting, C::ContractBallot { .. })
            ),
            Phase::Sign => {
                v == V::Contracting && matches!(self.context, C::ContractOffer { .. })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(AgentError::ContextMismatch { phase: self.phase, variant: v })
        }
    }
}

/// The typed content of an agent's answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecisionPayload {
    Act(MixedAction),
    Mediator(MediatorSpec),
    Contract(ContractSpec),
    /// One approval per ballot entry, in ballot order.
    Vote(Vec<bool>),
    Sign(bool),
}

impl DecisionPayload {
    /// The phase this payload answers.
    pub fn phase(&self) -> Phase {
        match self {
            DecisionPayload::Act(_) => Phase::Act,
            DecisionPayload::Mediator(_) => Phase::ProposeMediator,
            DecisionPayload::Contract(_) => Phase::ProposeContract,
            DecisionPayload::Vote(_) => Phase::Vote,
            DecisionPayload::Sign(_) => Phase::Sign,
        }
    }
}

/// A parsed answer plus the unparsed transcript it came from (scripted
/// agents record their canonical wire serialization so logs look uniform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub payload: DecisionPayload,
    pub raw: Option<String>,
}

/// Anything that can answer decision requests. Implementations may keep
/// episode-scoped memory behind `&mut self`; the engine constructs fresh
/// agents per episode.
pub trait Decider {
    fn decide(&mut self, request: &DecisionRequest<'_>) -> Result<DecisionResponse, AgentError>;
}

/// Whether an external agent is asked to reason out loud before answering
/// or to emit the answer object alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningMode {
    StepByStep,
    Direct,
}

/// An agent identity: one of the scripted rules, or an external model
/// reached over a chat transport.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AgentKind {
    /// Point mass on the cooperative action.
    AlwaysCooperate,
    /// Point mass on the defect action.
    AlwaysDefect,
    /// Point mass on a fixed action index.
    Always { action: usize },
    /// Uniform distribution over whatever actions are available.
    UniformRandom,
    /// Copy the co-player's previous action; cooperate first. With several
    /// co-players: cooperate iff all of them cooperated last round.
    TitForTat,
    /// Cooperate until any visible record deviates from the cooperative
    /// profile, then play the defect action forever.
    GrimTrigger,
    /// Reputation labeling: everyone starts in good standing; deviating
    /// against an all-good group loses it for good. Cooperate iff every
    /// current co-player is in good standing.
    StandingNorm,
    /// Proposes the punish-unless-unanimous mediator plan, approves only
    /// identical plans, and delegates exactly when that plan is elected.
    CooperativeMediator,
    /// Proposes the bonus-for-cooperation contract, approves/signs only
    /// identical contracts, and cooperates exactly when it is in force.
    CooperativeContractor,
    /// Votes by one-shot equilibrium analysis: approve a proposal iff the
    /// cooperative outcome is a Nash equilibrium under it.
    BestResponseVoter,
    /// A model reached over a chat transport.
    External { model: String, reasoning: ReasoningMode },
}

impl AgentKind {
    pub fn is_scripted(&self) -> bool {
        !matches!(self, AgentKind::External { .. })
    }

    /// Stable identifier used in rosters, logs, and report tables.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgentKind::AlwaysCooperate => f.write_str("always_cooperate"),
            AgentKind::AlwaysDefect => f.write_str("always_defect"),
            AgentKind::Always { action } => write!(f, "always:A{action}"),
            AgentKind::UniformRandom => f.write_str("uniform_random"),
            AgentKind::TitForTat => f.write_str("tit_for_tat"),
            AgentKind::GrimTrigger => f.write_str("grim_trigger"),
            AgentKind::StandingNorm => f.write_str("standing_norm"),
            AgentKind::CooperativeMediator => f.write_str("cooperative_mediator"),
            AgentKind::CooperativeContractor => f.write_str("cooperative_contractor"),
            AgentKind::BestResponseVoter => f.write_str("best_response_voter"),
            AgentKind::External { model, reasoning } => match reasoning {
                ReasoningMode::StepByStep => write!(f, "external:{model}"),
                ReasoningMode::Direct => write!(f, "external:{model}:direct"),
            },
        }
    }
}

impl From<AgentKind> for String {
    fn from(kind: AgentKind) -> String {
        kind.to_string()
    }
}

/// Error for agent kind strings that don't name a known rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown agent kind {0:?}")]
pub struct UnknownAgentKind(pub String);

impl std::str::FromStr for AgentKind {
    type Err = UnknownAgentKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "always_cooperate" => return Ok(AgentKind::AlwaysCooperate),
            "always_defect" => return Ok(AgentKind::AlwaysDefect),
            "uniform_random" => return Ok(AgentKind::UniformRandom),
            "tit_for_tat" => return Ok(AgentKind::TitForTat),
            "grim_trigger" => return Ok(AgentKind::GrimTrigger),
            "standing_norm" => return Ok(AgentKind::StandingNorm),
            "cooperative_mediator" => return Ok(AgentKind::CooperativeMediator),
            "cooperative_contractor" => return Ok(AgentKind::CooperativeContractor),
            "best_response_voter" => return Ok(AgentKind::BestResponseVoter),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("always:") {
            let digits = rest.strip_prefix('A').unwrap_or(rest);
            if let Ok(action) = digits.parse::<usize>() {
                return Ok(AgentKind::Always { action });
            }
        }
        if let Some(rest) = s.strip_prefix("external:") {
            // A trailing ":direct" selects answer-only prompting. Model
            // names therefore cannot end in ":direct" themselves.
            let (model, reasoning) = match rest.strip_suffix(":direct") {
                Some(model) => (model, ReasoningMode::Direct),
                None => (rest, ReasoningMode::StepByStep),
            };
            if !model.is_empty() {
                return Ok(AgentKind::External {
                    model: model.to_string(),
                    reasoning,
                });
            }
        }
        Err(UnknownAgentKind(s.to_string()))
    }
}

impl TryFrom<String> for AgentKind {
    type Error = UnknownAgentKind;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Failures while producing a decision.
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("seat {seat} out of range for a {players}-player game")]
    BadSeat { seat: usize, players: usize },
    #[error("no {phase} request can arise under {}", variant.as_str())]
    ContextMismatch { phase: Phase, variant: MechanismVariant },
    #[error("fixed action {action} out of range; {available} actions available")]
    ActionOutOfRange { action: usize, available: usize },
    #[error("agent kind {kind} needs a chat transport")]
    NeedsTransport { kind: String },
    #[error("could not parse a response after {attempts} attempt(s): {last}")]
    ParseFailed { attempts: usize, last: WireError },
    #[error("transport failure during {phase}: {source}")]
    Transport { phase: Phase, source: TransportError },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Game;
    use crate::mechanism::MechanismConfig;

    #[test]
    fn kind_strings_round_trip() {
        let kinds = [
            AgentKind::AlwaysCooperate,
            AgentKind::AlwaysDefect,
            AgentKind::Always { action: 2 },
            AgentKind::UniformRandom,
            AgentKind::TitForTat,
            AgentKind::GrimTrigger,
            AgentKind::StandingNorm,
            AgentKind::CooperativeMediator,
            AgentKind::CooperativeContractor,
            AgentKind::BestResponseVoter,
            AgentKind::External { model: "local-7b".into(), reasoning: ReasoningMode::StepByStep },
            AgentKind::External { model: "local-7b".into(), reasoning: ReasoningMode::Direct },
        ];
        for kind in kinds {
            let s = kind.to_string();
            assert_eq!(s.parse::<AgentKind>().unwrap(), kind, "{s}");
        }
        assert!("frobnicator".parse::<AgentKind>().is_err());
        assert!("external:".parse::<AgentKind>().is_err());
        // Bare indices work too.
        assert_eq!("always:3".parse::<AgentKind>().unwrap(), AgentKind::Always { action: 3 });
    }

    #[test]
    fn kind_serde_uses_the_string_form() {
        let kind = AgentKind::External { model: "local-7b".into(), reasoning: ReasoningMode::Direct };
        let json = serde_json::to_string(&kind).unwrap();
        assert_eq!(json, "\"external:local-7b:direct\"");
        assert_eq!(serde_json::from_str::<AgentKind>(&json).unwrap(), kind);
    }

    #[test]
    fn request_validation_matches_engine_shapes() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::Mediation);
        let spec = MediatorSpec::cooperative(&game).unwrap();

        let good = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::MediatorActive { spec: spec.clone(), proposer: 0 },
        };
        good.validate().unwrap();
        assert_eq!(good.action_count(), 3);
        assert_eq!(good.action_labels(), vec!["A0", "A1", "A2"]);

        let bad = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Sign,
            context: MechanismContext::None,
        };
        assert!(matches!(bad.validate(), Err(AgentError::ContextMismatch { .. })));

        let bad_seat = DecisionRequest {
            game: &game,
            seat: 2,
            config: &config,
            phase: Phase::ProposeMediator,
            context: MechanismContext::None,
        };
        assert!(matches!(bad_seat.validate(), Err(AgentError::BadSeat { .. })));
    }
}
