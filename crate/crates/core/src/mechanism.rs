//! Mechanism layer: the six ways a base game can be wrapped, plus the
//! machinery they share (payment-contract transforms, mediator delegation,
//! approval voting over proposals, discount-weighted repeated payoffs).
//!
//! The two constructive specs — [`MediatorSpec::cooperative`] and
//! [`ContractSpec::cooperative`] — are the reference designs whose
//! equilibrium claims `verify-theorem` checks: a mediator that plays the
//! cooperative action only under unanimous delegation and punishes partial
//! delegation, and a transfer scheme paying a bonus for the cooperative
//! action that is large enough to make it dominant.

use crate::game::{ActionLabel, Game, GameError, MixedAction};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    BadDelta(f64),
    #[error("history window must be at least 1")]
    BadWindow,
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("population size {size} is not divisible by group size {group}")]
    BadPopulation { size: usize, group: usize },
    #[error("population size only applies to reputation variants")]
    PopulationNotApplicable,
    #[error("mediator plan covers {got} delegation counts, need one per player count 1..={want}")]
    PlanLength { got: usize, want: usize },
    #[error("this transform needs every seat to share one action set; player {0} differs")]
    HeterogeneousActions(usize),
    #[error("plan entry for {count} delegators mixes over {got} actions, base game has {want}")]
    PlanActions { count: usize, got: usize, want: usize },
    #[error("contract assigns transfers to {got} actions, base game has {want}")]
    TransferLength { got: usize, want: usize },
    #[error("ballot {0} covers the wrong number of proposals")]
    BadBallot(usize),
    #[error("cannot run a vote without proposals")]
    NoProposals,
    #[error("cooperative profile must pick the same action label in every seat to build this spec")]
    AsymmetricCoop,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The six mechanism variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismVariant {
    NoMechanism,
    Repetition,
    ReputationMinus,
    ReputationPlus,
    Mediation,
    Contracting,
}

impl MechanismVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MechanismVariant::NoMechanism => "no_mechanism",
            MechanismVariant::Repetition => "repetition",
            MechanismVariant::ReputationMinus => "reputation_minus",
            MechanismVariant::ReputationPlus => "reputation_plus",
            MechanismVariant::Mediation => "mediation",
            MechanismVariant::Contracting => "contracting",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "no_mechanism" => MechanismVariant::NoMechanism,
            "repetition" => MechanismVariant::Repetition,
            "reputation_minus" => MechanismVariant::ReputationMinus,
            "reputation_plus" => MechanismVariant::ReputationPlus,
            "mediation" => MechanismVariant::Mediation,
            "contracting" => MechanismVariant::Contracting,
            _ => return None,
        })
    }

    /// Repeated-play variants resolve over `horizon` rounds; the others are
    /// one round of (possibly transformed) play.
    pub fn is_repeated(&self) -> bool {
        matches!(
            self,
            MechanismVariant::Repetition
                | MechanismVariant::ReputationMinus
                | MechanismVariant::ReputationPlus
        )
    }

    pub fn is_reputation(&self) -> bool {
        matches!(self, MechanismVariant::ReputationMinus | MechanismVariant::ReputationPlus)
    }
}

impl std::fmt::Display for MechanismVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mechanism parameters. Defaults mirror the benchmark setup: continuation
/// probability 0.8, history window 3, truncation horizon 15.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub variant: MechanismVariant,
    /// Continuation probability per extra round (also the discount factor).
    pub delta: f64,
    /// How many rounds back served histories may reach.
    pub window: usize,
    /// Hard truncation of the repeated interaction.
    pub horizon: usize,
    /// Pool size for reputation variants; `None` picks one member per
    /// (kind, seat) slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
}

impl MechanismConfig {
    pub fn new(variant: MechanismVariant) -> Self {
        Self { variant, delta: 0.8, window: 3, horizon: 15, population_size: None }
    }

    pub fn validate(&self, group_size: usize) -> Result<(), MechanismError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(MechanismError::BadDelta(self.delta));
        }
        if self.window == 0 {
            return Err(MechanismError::BadWindow);
        }
        if self.horizon == 0 {
            return Err(MechanismError::BadHorizon);
        }
        match (self.variant.is_reputation(), self.population_size) {
            (false, Some(_)) => return Err(MechanismError::PopulationNotApplicable),
            (true, Some(size)) if size == 0 || size % group_size != 0 => {
                return Err(MechanismError::BadPopulation { size, group: group_size })
            }
            _ => {}
        }
        Ok(())
    }

    /// Number of rounds an episode of this variant plays.
    pub fn rounds(&self) -> usize {
        if self.variant.is_repeated() {
            self.horizon
        } else {
            1
        }
    }
}

/// Requires all seats to expose one shared action set; mediator plans and
/// contract transfer maps are keyed by action, not by (seat, action).
fn shared_action_count(game: &Game) -> Result<usize, MechanismError> {
    let m = game.num_actions(0);
    for p in 1..game.players() {
        if game.num_actions(p) != m {
            return Err(MechanismError::HeterogeneousActions(p));
        }
    }
    Ok(m)
}

/// Action every seat plays under the cooperative profile, when that is a
/// single shared index.
fn shared_coop_action(game: &Game) -> Result<usize, MechanismError> {
    let c = game.coop_profile()[0];
    if game.coop_profile().iter().any(|&a| a != c) {
        return Err(MechanismError::AsymmetricCoop);
    }
    Ok(c)
}

fn shared_defect_action(game: &Game) -> Result<usize, MechanismError> {
    let d = game.defect_profile()[0];
    if game.defect_profile().iter().any(|&a| a != d) {
        return Err(MechanismError::AsymmetricCoop);
    }
    Ok(d)
}

/// A mediator design: the mixed action it plays on behalf of delegators, as
/// a function of how many players delegated. `plan[d - 1]` answers for `d`
/// delegators; the drawn action is applied to every delegator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediatorSpec {
    pub plan: Vec<MixedAction>,
}

impl MediatorSpec {
    pub fn new(plan: Vec<MixedAction>, game: &Game) -> Result<Self, MechanismError> {
        let m = shared_action_count(game)?;
        if plan.len() != game.players() {
            return Err(MechanismError::PlanLength { got: plan.len(), want: game.players() });
        }
        for (i, mix) in plan.iter().enumerate() {
            if mix.num_actions() != m {
                return Err(MechanismError::PlanActions {
                    count: i + 1,
                    got: mix.num_actions(),
                    want: m,
                });
            }
        }
        Ok(Self { plan })
    }

    /// The cooperation-sustaining design: play the cooperative action only
    /// under unanimous delegation, the punish action whenever delegation is
    /// partial. Unilateral refusal to delegate then meets punishment, which
    /// makes full delegation a pure equilibrium of the augmented game.
    pub fn cooperative(game: &Game) -> Result<Self, MechanismError> {
        let m = shared_action_count(game)?;
        let coop = shared_coop_action(game)?;
        let punish = shared_defect_action(game)?;
        let n = game.players();
        let plan = (0..n)
            .map(|i| {
                let d = i + 1;
                MixedAction::pure(if d == n { coop } else { punish }, m)
            })
            .collect();
        Ok(Self { plan })
    }

    /// Expected action distribution for `d` delegators.
    pub fn for_delegators(&self, d: usize) -> &MixedAction {
        &self.plan[d - 1]
    }
}

/// Index and wire label of the extra "delegate" action the mediator adds.
pub fn delegate_action(game: &Game) -> Result<(usize, String), MechanismError> {
    let m = shared_action_count(game)?;
    Ok((m, format!("A{m}")))
}

/// Augments the game with a delegate action per seat and bakes the
/// mediator's (possibly mixed) plan into expected payoffs. Profiles with no
/// delegators keep their base payoffs; with `d >= 1` delegators the mediator
/// draws one action from `plan[d]` and every delegator plays it.
pub fn augment_with_mediator(game: &Game, spec: &MediatorSpec) -> Result<Game, MechanismError> {
    let m = shared_action_count(game)?;
    if spec.plan.len() != game.players() {
        return Err(MechanismError::PlanLength { got: spec.plan.len(), want: game.players() });
    }
    let n = game.players();
    let actions: Vec<Vec<ActionLabel>> = (0..n)
        .map(|p| {
            let mut labels = game.action_labels(p).to_vec();
            labels.push(ActionLabel::annotated(
                format!("A{m}"),
                "Delegate to Mediator".to_string(),
            ));
            labels
        })
        .collect();
    let mut payoffs = Vec::with_capacity((m + 1).pow(n as u32) * n);
    let mut profile = vec![0usize; n];
    loop {
        let delegators: Vec<usize> = (0..n).filter(|&i| profile[i] == m).collect();
        if delegators.is_empty() {
            payoffs.extend(game.payoff_vector(&profile));
        } else {
            let mix = spec.for_delegators(delegators.len());
            let mut expected = vec![0.0; n];
            let mut realized = profile.clone();
            for action in 0..m {
                let p = mix.prob(action);
                if p == 0.0 {
                    continue;
                }
                for &i in &delegators {
                    realized[i] = action;
                }
                for (i, e) in expected.iter_mut().enumerate() {
                    *e += p * game.payoff(&realized, i);
                }
            }
            payoffs.extend(expected);
        }
        // advance row-major over the augmented action sets
        let mut i = n;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            profile[i] += 1;
            if profile[i] <= m {
                break;
            }
            profile[i] = 0;
        }
        if profile.iter().all(|&a| a == 0) {
            break;
        }
    }
    Ok(Game::from_tensor(
        format!("{}+mediator", game.name()),
        actions,
        payoffs,
        game.coop_profile().to_vec(),
        game.defect_profile().to_vec(),
        game.payoff_text().clone(),
    )?)
}

/// A payment contract: one integer transfer per action label, shared by all
/// seats. Positive means the chooser receives that many points drawn
/// equally from the other players; negative means the chooser pays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub transfers: Vec<i64>,
}

impl ContractSpec {
    pub fn new(transfers: Vec<i64>, game: &Game) -> Result<Self, MechanismError> {
        let m = shared_action_count(game)?;
        if transfers.len() != m {
            return Err(MechanismError::TransferLength { got: transfers.len(), want: m });
        }
        Ok(Self { transfers })
    }

    /// Zero transfers: signing this changes nothing.
    pub fn identity(game: &Game) -> Result<Self, MechanismError> {
        Ok(Self { transfers: vec![0; shared_action_count(game)?] })
    }

    /// The cooperation-sustaining design: pay the cooperative action a
    /// bonus of M*(n-1) points (M = one plus the game's widest payoff
    /// spread, rounded up to keep transfers integral). The bonus outweighs
    /// any base-game temptation, making cooperation strictly dominant while
    /// transfers always net to zero.
    pub fn cooperative(game: &Game) -> Result<Self, MechanismError> {
        let m = shared_action_count(game)?;
        let coop = shared_coop_action(game)?;
        let mut spread = 0.0f64;
        for profile in game.profiles() {
            for i in 0..game.players() {
                let u = game.payoff(&profile, i);
                for other in game.profiles() {
                    spread = spread.max(u - game.payoff(&other, i));
                }
            }
        }
        let bonus = ((spread + 1.0) * (game.players() as f64 - 1.0)).ceil() as i64;
        let mut transfers = vec![0i64; m];
        transfers[coop] = bonus;
        Ok(Self { transfers })
    }

    /// Per-player net transfer at a pure profile: what `a_i` earns its
    /// chooser minus their equal share of everyone else's receipts. Sums to
    /// zero across players at every profile.
    pub fn transfer_vector(&self, profile: &[usize]) -> Vec<f64> {
        let n = profile.len();
        let split = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let own = self.transfers[profile[i]] as f64;
                let others: f64 =
                    (0..n).filter(|&j| j != i).map(|j| self.transfers[profile[j]] as f64).sum();
                own - others / split
            })
            .collect()
    }
}

/// Applies a signed contract to the payoff tensor:
/// `v_i(a) = u_i(a) + t(a_i) - sum_{j != i} t(a_j) / (n - 1)`.
pub fn apply_contract(game: &Game, spec: &ContractSpec) -> Result<Game, MechanismError> {
    let m = shared_action_count(game)?;
    if spec.transfers.len() != m {
        return Err(MechanismError::TransferLength { got: spec.transfers.len(), want: m });
    }
    let n = game.players();
    let num_profiles: usize = (0..n).map(|p| game.num_actions(p)).product();
    let mut payoffs = Vec::with_capacity(num_profiles * n);
    for profile in game.profiles() {
        let t = spec.transfer_vector(&profile);
        for (i, transfer) in t.iter().enumerate() {
            payoffs.push(game.payoff(&profile, i) + transfer);
        }
    }
    Ok(Game::from_tensor(
        format!("{}+contract", game.name()),
        (0..n).map(|p| game.action_labels(p).to_vec()).collect(),
        payoffs,
        game.coop_profile().to_vec(),
        game.defect_profile().to_vec(),
        game.payoff_text().clone(),
    )?)
}

/// Outcome of an approval vote over proposals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteOutcome {
    /// Index of the winning proposal.
    pub winner: usize,
    /// Approval count per proposal.
    pub approvals: Vec<u32>,
}

/// Approval voting: every ballot approves any subset of proposals; the
/// winner is drawn uniformly from the most-approved set (deterministic
/// given the rng state).
pub fn run_proposal_vote<R: Rng + ?Sized>(
    num_proposals: usize,
    ballots: &[Vec<bool>],
    rng: &mut R,
) -> Result<VoteOutcome, MechanismError> {
    if num_proposals == 0 {
        return Err(MechanismError::NoProposals);
    }
    let mut approvals = vec![0u32; num_proposals];
    for (v, ballot) in ballots.iter().enumerate() {
        if ballot.len() != num_proposals {
            return Err(MechanismError::BadBallot(v));
        }
        for (p, &yes) in ballot.iter().enumerate() {
            if yes {
                approvals[p] += 1;
            }
        }
    }
    let best = *approvals.iter().max().expect("non-empty");
    let tied: Vec<usize> =
        (0..num_proposals).filter(|&p| approvals[p] == best).collect();
    let winner = tied[rng.random_range(0..tied.len())];
    Ok(VoteOutcome { winner, approvals })
}

/// Discount-weighted average of a truncated payoff stream:
/// `sum_t delta^(t-1) x_t / sum_t delta^(t-1)`.
///
/// Computed by the incremental weighted-mean recurrence, which keeps the
/// result exactly equal to the common value for constant streams (an
/// all-cooperate run must normalize to exactly 1).
pub fn repetition_weighted_payoff(payoffs: &[f64], delta: f64) -> f64 {
    let mut mean = 0.0;
    let mut total_weight = 0.0;
    let mut weight = 1.0;
    for &x in payoffs {
        total_weight += weight;
        mean += (weight / total_weight) * (x - mean);
        weight *= delta;
    }
    mean
}

/// Probability that a delta-continuation interaction outlives the horizon:
/// the payoff mass the truncation ignores.
pub fn truncation_tail_mass(delta: f64, horizon: usize) -> f64 {
    delta.powi(horizon as i32)
}
