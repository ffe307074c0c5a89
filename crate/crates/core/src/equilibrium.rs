//! Dominance analysis, pure Nash enumeration, and the repeated-play
//! incentive certificate used to verify the cooperation constructions.

use crate::game::Game;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guard for exhaustive profile enumeration.
const MAX_ENUMERATED_PROFILES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("game has {0} pure profiles, refusing to enumerate more than {MAX_ENUMERATED_PROFILES}")]
    TooManyProfiles(usize),
    #[error("profile {0:?} is out of range for this game")]
    BadProfile(Vec<usize>),
    #[error("coop and punish profiles must differ for the certificate to mean anything")]
    IdenticalReferenceProfiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominanceMode {
    /// Strictly better against every surviving opponent profile.
    Strict,
    /// At least as good everywhere, strictly better somewhere.
    Weak,
}

/// Does action `a` dominate action `b` for `player`, with opponents
/// restricted to their surviving action sets?
pub fn dominates(
    game: &Game,
    player: usize,
    a: usize,
    b: usize,
    mode: DominanceMode,
    survivors: &[Vec<usize>],
) -> bool {
    if a == b {
        return false;
    }
    let mut some_strict = false;
    let mut profile = vec![0usize; game.players()];
    let done = for_each_opponent_profile(survivors, player, &mut profile, &mut |profile| {
        profile[player] = a;
        let ua = game.payoff(profile, player);
        profile[player] = b;
        let ub = game.payoff(profile, player);
        match mode {
            DominanceMode::Strict => {
                if ua <= ub {
                    return false;
                }
            }
            DominanceMode::Weak => {
                if ua < ub {
                    return false;
                }
                if ua > ub {
                    some_strict = true;
                }
            }
        }
        true
    });
    done && match mode {
        DominanceMode::Strict => true,
        DominanceMode::Weak => some_strict,
    }
}

/// Walks the cartesian product of the other players' surviving actions.
/// Returns false early if the visitor bails out.
fn for_each_opponent_profile(
    survivors: &[Vec<usize>],
    player: usize,
    profile: &mut Vec<usize>,
    visit: &mut impl FnMut(&mut Vec<usize>) -> bool,
) -> bool {
    fn rec(
        survivors: &[Vec<usize>],
        player: usize,
        pos: usize,
        profile: &mut Vec<usize>,
        visit: &mut impl FnMut(&mut Vec<usize>) -> bool,
    ) -> bool {
        if pos == survivors.len() {
            return visit(profile);
        }
        if pos == player {
            return rec(survivors, player, pos + 1, profile, visit);
        }
        for &a in &survivors[pos] {
            profile[pos] = a;
            if !rec(survivors, player, pos + 1, profile, visit) {
                return false;
            }
        }
        true
    }
    rec(survivors, player, 0, profile, visit)
}

/// One elimination event: `action` of `player` was removed because
/// `dominated_by` dominated it over the survivor sets current at that step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub player: usize,
    pub action: usize,
    pub dominated_by: usize,
    pub mode: DominanceMode,
}

/// Full record of an iterated elimination run: the ordered steps and the
/// surviving action sets per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationTrace {
    pub steps: Vec<EliminationStep>,
    pub survivors: Vec<Vec<usize>>,
}

impl EliminationTrace {
    /// True when exactly one profile survives.
    pub fn resolved(&self) -> bool {
        self.survivors.iter().all(|s| s.len() == 1)
    }

    /// The unique surviving profile, if the game resolved.
    pub fn resolution(&self) -> Option<Vec<usize>> {
        self.resolved().then(|| self.survivors.iter().map(|s| s[0]).collect())
    }
}

/// Iterated elimination of dominated actions with a fixed deterministic
/// order: after every removal the scan restarts at player 0, walking players
/// by ascending index and candidate actions by ascending index; the first
/// dominated action found (checked against ascending dominators) is removed.
/// For strict dominance the surviving sets are order-independent; for weak
/// dominance the order is part of the contract.
pub fn iterated_elimination(game: &Game, mode: DominanceMode) -> EliminationTrace {
    let mut survivors: Vec<Vec<usize>> =
        (0..game.players()).map(|p| (0..game.num_actions(p)).collect()).collect();
    let mut steps = Vec::new();
    'scan: loop {
        for player in 0..game.players() {
            if survivors[player].len() < 2 {
                continue;
            }
            for bi in 0..survivors[player].len() {
                let b = survivors[player][bi];
                for &a in &survivors[player] {
                    if a == b {
                        continue;
                    }
                    if dominates(game, player, a, b, mode, &survivors) {
                        survivors[player].retain(|&x| x != b);
                        steps.push(EliminationStep { player, action: b, dominated_by: a, mode });
                        continue 'scan;
                    }
                }
            }
        }
        break;
    }
    EliminationTrace { steps, survivors }
}

/// Is `profile` a pure Nash equilibrium (no unilateral strict improvement)?
pub fn is_pure_nash(game: &Game, profile: &[usize]) -> bool {
    let u: Vec<f64> = (0..game.players()).map(|i| game.payoff(profile, i)).collect();
    let mut work = profile.to_vec();
    for player in 0..game.players() {
        for dev in 0..game.num_actions(player) {
            if dev == profile[player] {
                continue;
            }
            work[player] = dev;
            if game.payoff(&work, player) > u[player] {
                return false;
            }
        }
        work[player] = profile[player];
    }
    true
}

/// Does every player's profile action weakly dominate all their
/// alternatives against *all* opponent profiles (not just survivors)?
pub fn is_weakly_dominant_profile(game: &Game, profile: &[usize]) -> bool {
    is_dominant_profile(game, profile, DominanceMode::Weak)
}

/// Dominant-profile check with an explicit mode. `Weak` requires at least
/// as good everywhere (and strictly better somewhere, per action pair);
/// `Strict` requires strictly better everywhere.
pub fn is_dominant_profile(game: &Game, profile: &[usize], mode: DominanceMode) -> bool {
    let full: Vec<Vec<usize>> =
        (0..game.players()).map(|p| (0..game.num_actions(p)).collect()).collect();
    (0..game.players()).all(|player| {
        (0..game.num_actions(player))
            .filter(|&b| b != profile[player])
            .all(|b| dominates(game, player, profile[player], b, mode, &full))
    })
}

/// All pure Nash equilibria in row-major profile order. Errors out instead
/// of enumerating games past the profile guard.
pub fn enumerate_pure_nash(game: &Game) -> Result<Vec<Vec<usize>>, EquilibriumError> {
    let profiles: usize = (0..game.players()).map(|p| game.num_actions(p)).product();
    if profiles > MAX_ENUMERATED_PROFILES {
        return Err(EquilibriumError::TooManyProfiles(profiles));
    }
    Ok(game.profiles().filter(|p| is_pure_nash(game, p)).collect())
}

/// Per-player incentive row of a grim-trigger certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncentiveRow {
    pub player: usize,
    /// Payoff on the cooperative path.
    pub coop_payoff: f64,
    /// Payoff once everyone reverts to the punish profile.
    pub punish_payoff: f64,
    /// Best one-shot deviation gain against the cooperative profile.
    pub one_shot_gain: f64,
    /// Per-round loss while being punished (coop - punish).
    pub per_round_loss: f64,
    /// Minimal discount factor deterring this player; 0 when deviation
    /// never gains, infinity when punishment carries no sting.
    pub threshold: f64,
}

/// Discount-factor certificate for sustaining `coop_profile` by grim
/// trigger (revert to `punish_profile` forever after any deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeCertificate {
    pub rows: Vec<IncentiveRow>,
    /// Tight threshold: max over players of g / (g + loss).
    pub delta_threshold: f64,
    /// Looser classical bound max M / (M + loss) with M = one plus the
    /// widest per-player payoff spread; None when punishment has no bite
    /// for some player.
    pub loose_delta_threshold: Option<f64>,
}

impl SpeCertificate {
    /// Would grim trigger sustain cooperation at this continuation
    /// probability?
    pub fn sustainable_at(&self, delta: f64) -> bool {
        delta < 1.0 && delta >= self.delta_threshold
    }
}

/// Computes the grim-trigger certificate: for each player, the best
/// one-shot gain g from deviating off the cooperative profile and the
/// per-round loss once play reverts to the punish profile; deterrence
/// needs delta >= g / (g + loss) per player.
pub fn grim_trigger_threshold(
    game: &Game,
    coop_profile: &[usize],
    punish_profile: &[usize],
) -> Result<SpeCertificate, EquilibriumError> {
    let check = |p: &[usize]| {
        if p.len() != game.players()
            || p.iter().enumerate().any(|(i, &a)| a >= game.num_actions(i))
        {
            Err(EquilibriumError::BadProfile(p.to_vec()))
        } else {
            Ok(())
        }
    };
    check(coop_profile)?;
    check(punish_profile)?;
    if coop_profile == punish_profile {
        return Err(EquilibriumError::IdenticalReferenceProfiles);
    }

    // Widest per-player payoff spread over the whole tensor, for the loose
    // bound M = spread + 1.
    let mut spread = f64::NEG_INFINITY;
    for profile in game.profiles() {
        for i in 0..game.players() {
            let u = game.payoff(&profile, i);
            for other in game.profiles() {
                let v = game.payoff(&other, i);
                if u - v > spread {
                    spread = u - v;
                }
            }
        }
    }
    let m = spread + 1.0;

    let mut rows = Vec::with_capacity(game.players());
    let mut tight = 0.0f64;
    let mut loose: Option<f64> = Some(0.0);
    let mut work = coop_profile.to_vec();
    for player in 0..game.players() {
        let coop_payoff = game.payoff(coop_profile, player);
        let punish_payoff = game.payoff(punish_profile, player);
        let mut best_dev = f64::NEG_INFINITY;
        for dev in 0..game.num_actions(player) {
            if dev == coop_profile[player] {
                continue;
            }
            work[player] = dev;
            best_dev = best_dev.max(game.payoff(&work, player));
        }
        work[player] = coop_profile[player];
        let one_shot_gain = best_dev - coop_payoff;
        let per_round_loss = coop_payoff - punish_payoff;
        let threshold = if one_shot_gain <= 0.0 {
            0.0
        } else if per_round_loss <= 0.0 {
            f64::INFINITY
        } else {
            one_shot_gain / (one_shot_gain + per_round_loss)
        };
        tight = tight.max(threshold);
        loose = match (loose, per_round_loss > 0.0) {
            (Some(acc), true) => Some(acc.max(m / (m + per_round_loss))),
            _ => None,
        };
        rows.push(IncentiveRow {
            player,
            coop_payoff,
            punish_payoff,
            one_shot_gain,
            per_round_loss,
            threshold,
        });
    }
    Ok(SpeCertificate { rows, delta_threshold: tight, loose_delta_threshold: loose })
}
