//! Normal-form games with integer-percentage mixed strategies.
//!
//! A [`Game`] is an immutable n-player payoff tensor plus per-player action
//! labels and two reference profiles (the cooperative outcome and the
//! mutual-defection outcome) used to normalize raw payoffs onto a common
//! scale. The five built-in benchmark games live here too.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema tag written into serialized game documents.
pub const GAME_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("game needs at least 2 players, got {0}")]
    TooFewPlayers(usize),
    #[error("player {0} needs at least 2 actions")]
    TooFewActions(usize),
    #[error("payoff tensor has {got} entries, expected {want}")]
    TensorSize { got: usize, want: usize },
    #[error("profile {0:?} is out of range for this game")]
    BadProfile(Vec<usize>),
    #[error("reference profiles give player {0} identical coop and defect payoffs; cannot normalize")]
    DegenerateReference(usize),
    #[error("public goods multiplier must satisfy 1 < multiplier < n, got {0}")]
    BadMultiplier(f64),
    #[error("mixed action weights must sum to 100, got {0}")]
    WeightSum(u32),
    #[error("mixed action has {got} weights, expected {want}")]
    WeightCount { got: usize, want: usize },
    #[error("unknown game name {0:?}")]
    UnknownName(String),
    #[error("game document schema {0} is not supported")]
    BadSchema(u32),
    #[error("game document is malformed: {0}")]
    BadDocument(String),
}

/// One selectable action: a wire label like `A0` plus an optional
/// human-facing annotation (Travelers claims carry "correspond to the
/// number 2" and so on).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionLabel {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

impl ActionLabel {
    pub fn plain(label: impl Into<String>) -> Self {
        Self { label: label.into(), annotation: None }
    }

    pub fn annotated(label: impl Into<String>, note: impl Into<String>) -> Self {
        Self { label: label.into(), annotation: Some(note.into()) }
    }
}

/// How the payoff rules are described in rendered prompts. Built-in games
/// with closed-form rules keep their formula text instead of a flat
/// enumeration of profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PayoffText {
    /// Enumerate every action profile from the acting seat's perspective.
    PairList,
    /// Travelers-style lowest-claim rule.
    TravelersRule,
    /// Linear public goods formula with the given player count and multiplier.
    PublicGoodsFormula { players: usize, multiplier: f64 },
}

/// Immutable n-player normal-form game.
///
/// The payoff tensor is stored flat in row-major profile order (player 0's
/// action is the most significant index) with the per-player payoffs of a
/// profile stored contiguously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Game {
    name: String,
    players: usize,
    actions: Vec<Vec<ActionLabel>>,
    payoffs: Vec<f64>,
    coop_profile: Vec<usize>,
    defect_profile: Vec<usize>,
    payoff_text: PayoffText,
}

impl Game {
    /// Builds a game from a flat row-major tensor. `payoffs[flat(profile) *
    /// players + i]` is player `i`'s payoff at `profile`.
    pub fn from_tensor(
        name: impl Into<String>,
        actions: Vec<Vec<ActionLabel>>,
        payoffs: Vec<f64>,
        coop_profile: Vec<usize>,
        defect_profile: Vec<usize>,
        payoff_text: PayoffText,
    ) -> Result<Self, GameError> {
        let players = actions.len();
        if players < 2 {
            return Err(GameError::TooFewPlayers(players));
        }
        for (i, acts) in actions.iter().enumerate() {
            if acts.len() < 2 {
                return Err(GameError::TooFewActions(i));
            }
        }
        let profiles: usize = actions.iter().map(Vec::len).product();
        let want = profiles * players;
        if payoffs.len() != want {
            return Err(GameError::TensorSize { got: payoffs.len(), want });
        }
        let game = Self {
            name: name.into(),
            players,
            actions,
            payoffs,
            coop_profile,
            defect_profile,
            payoff_text,
        };
        game.check_profile(&game.coop_profile)?;
        game.check_profile(&game.defect_profile)?;
        for i in 0..players {
            let c = game.payoff(&game.coop_profile, i);
            let d = game.payoff(&game.defect_profile, i);
            if c == d {
                return Err(GameError::DegenerateReference(i));
            }
        }
        Ok(game)
    }

    fn check_profile(&self, profile: &[usize]) -> Result<(), GameError> {
        if profile.len() != self.players
            || profile.iter().zip(&self.actions).any(|(&a, acts)| a >= acts.len())
        {
            return Err(GameError::BadProfile(profile.to_vec()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn action_labels(&self, player: usize) -> &[ActionLabel] {
        &self.actions[player]
    }

    pub fn coop_profile(&self) -> &[usize] {
        &self.coop_profile
    }

    pub fn defect_profile(&self) -> &[usize] {
        &self.defect_profile
    }

    pub fn payoff_text(&self) -> &PayoffText {
        &self.payoff_text
    }

    /// Flat index of a pure profile (row-major, player 0 most significant).
    pub fn flat_index(&self, profile: &[usize]) -> usize {
        debug_assert_eq!(profile.len(), self.players);
        let mut idx = 0;
        for (p, &a) in profile.iter().enumerate() {
            debug_assert!(a < self.actions[p].len());
            idx = idx * self.actions[p].len() + a;
        }
        idx
    }

    /// Player `player`'s payoff at a pure action profile.
    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        self.payoffs[self.flat_index(profile) * self.players + player]
    }

    /// Payoffs of all players at a pure profile, in seat order.
    pub fn payoff_vector(&self, profile: &[usize]) -> Vec<f64> {
        let base = self.flat_index(profile) * self.players;
        self.payoffs[base..base + self.players].to_vec()
    }

    /// Iterates all pure profiles in row-major order.
    pub fn profiles(&self) -> ProfileIter {
        ProfileIter {
            sizes: self.actions.iter().map(Vec::len).collect(),
            next: Some(vec![0; self.players]),
        }
    }

    /// Maps a raw payoff for `player` onto the [defect = 0, coop = 1] scale.
    /// Values outside [0, 1] are meaningful (e.g. transfer-augmented games
    /// can pay more than the cooperative reference).
    pub fn normalize_payoff(&self, player: usize, raw: f64) -> f64 {
        let c = self.payoff(&self.coop_profile, player);
        let d = self.payoff(&self.defect_profile, player);
        (raw - d) / (c - d)
    }

    /// Serializes to a versioned plain-text document (TOML).
    pub fn to_document(&self) -> String {
        let doc = GameDocument { schema: GAME_SCHEMA, game: self.clone() };
        toml::to_string(&doc).expect("game serialization cannot fail")
    }

    /// Parses a document produced by [`Game::to_document`], re-validating
    /// every structural invariant.
    pub fn from_document(text: &str) -> Result<Self, GameError> {
        let doc: GameDocument =
            toml::from_str(text).map_err(|e| GameError::BadDocument(e.to_string()))?;
        if doc.schema != GAME_SCHEMA {
            return Err(GameError::BadSchema(doc.schema));
        }
        let g = doc.game;
        Game::from_tensor(g.name, g.actions, g.payoffs, g.coop_profile, g.defect_profile, g.payoff_text)
    }

    // ---- built-in benchmark games ----

    /// Prisoner's Dilemma. A0 = cooperate, A1 = defect.
    pub fn prisoners() -> Self {
        let labels = || vec![ActionLabel::plain("A0"), ActionLabel::plain("A1")];
        Game::from_tensor(
            "prisoners",
            vec![labels(), labels()],
            // (C,C) (C,D) (D,C) (D,D)
            vec![2.0, 2.0, 0.0, 3.0, 3.0, 0.0, 1.0, 1.0],
            vec![0, 0],
            vec![1, 1],
            PayoffText::PairList,
        )
        .expect("built-in game is valid")
    }

    /// Traveler's Dilemma over claims $2..$5; Ak corresponds to the number
    /// k + 2. Equal claims pay face value; otherwise the lower claim wins a
    /// +2 bonus and the higher claim eats a -2 penalty, both at the lower
    /// claim's face value.
    pub fn travelers() -> Self {
        let labels = || {
            (0..4)
                .map(|i| {
                    ActionLabel::annotated(
                        format!("A{i}"),
                        format!("correspond to the number {}", i + 2),
                    )
                })
                .collect::<Vec<_>>()
        };
        let claim = |a: usize| (a + 2) as f64;
        let mut payoffs = Vec::with_capacity(4 * 4 * 2);
        for x in 0..4 {
            for y in 0..4 {
                let (u1, u2) = if x == y {
                    (claim(x), claim(y))
                } else if x < y {
                    (claim(x) + 2.0, claim(x) - 2.0)
                } else {
                    (claim(y) - 2.0, claim(y) + 2.0)
                };
                payoffs.push(u1);
                payoffs.push(u2);
            }
        }
        Game::from_tensor(
            "travelers",
            vec![labels(), labels()],
            payoffs,
            vec![3, 3],
            vec![0, 0],
            PayoffText::TravelersRule,
        )
        .expect("built-in game is valid")
    }

    /// Trust game. Player 1: A0 = invest, A1 = keep. Player 2: A0 = share
    /// the grown pot, A1 = keep it.
    pub fn trust() -> Self {
        let labels = || vec![ActionLabel::plain("A0"), ActionLabel::plain("A1")];
        Game::from_tensor(
            "trust",
            vec![labels(), labels()],
            // (invest,share) (invest,keep) (keep,share) (keep,keep)
            vec![10.0, 10.0, 0.0, 20.0, 6.0, 2.0, 4.0, 4.0],
            vec![0, 0],
            vec![1, 1],
            PayoffText::PairList,
        )
        .expect("built-in game is valid")
    }

    /// Linear public goods game: contributors pay 1 point into a pot that is
    /// scaled by `multiplier` and split evenly. A0 = contribute, A1 = keep.
    pub fn public_goods(params: PublicGoodsParams) -> Result<Self, GameError> {
        let PublicGoodsParams { players, multiplier } = params;
        if players < 2 {
            return Err(GameError::TooFewPlayers(players));
        }
        if !(multiplier > 1.0 && multiplier < players as f64) {
            return Err(GameError::BadMultiplier(multiplier));
        }
        let labels = || vec![ActionLabel::plain("A0"), ActionLabel::plain("A1")];
        let n = players;
        let mut payoffs = Vec::with_capacity((1usize << n) * n);
        let mut profile = vec![0usize; n];
        loop {
            let contributors = profile.iter().filter(|&&a| a == 0).count();
            let share = multiplier * contributors as f64 / n as f64;
            for &a in profile.iter() {
                payoffs.push(if a == 0 { share } else { 1.0 + share });
            }
            // advance row-major
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                profile[i] += 1;
                if profile[i] < 2 {
                    break;
                }
                profile[i] = 0;
            }
            if profile.iter().all(|&a| a == 0) {
                break;
            }
        }
        Game::from_tensor(
            "public_goods",
            (0..n).map(|_| labels()).collect(),
            payoffs,
            vec![0; n],
            vec![1; n],
            PayoffText::PublicGoodsFormula { players: n, multiplier },
        )
    }

    /// Stag hunt with configurable payoffs. A0 = stag, A1 = hare.
    pub fn stag_hunt(payoffs: StagHuntPayoffs) -> Self {
        let labels = || vec![ActionLabel::plain("A0"), ActionLabel::plain("A1")];
        let StagHuntPayoffs { stag_stag, stag_hare, hare_stag, hare_hare } = payoffs;
        Game::from_tensor(
            "stag_hunt",
            vec![labels(), labels()],
            vec![
                stag_stag, stag_stag, stag_hare, hare_stag, hare_stag, stag_hare, hare_hare,
                hare_hare,
            ],
            vec![0, 0],
            vec![1, 1],
            PayoffText::PairList,
        )
        .expect("stag hunt payoffs must keep coop != defect per player")
    }

    /// Looks up a built-in game by its canonical name, using default
    /// parameters where the game takes any.
    pub fn by_name(name: &str) -> Result<Self, GameError> {
        match name {
            "prisoners" => Ok(Self::prisoners()),
            "travelers" => Ok(Self::travelers()),
            "trust" => Ok(Self::trust()),
            "public_goods" => Self::public_goods(PublicGoodsParams::default()),
            "stag_hunt" => Ok(Self::stag_hunt(StagHuntPayoffs::default())),
            other => Err(GameError::UnknownName(other.to_string())),
        }
    }

    /// All five built-in games with default parameters. The first four are
    /// the social dilemmas; stag hunt is a coordination control.
    pub fn builtins() -> Vec<Self> {
        vec![
            Self::prisoners(),
            Self::travelers(),
            Self::trust(),
            Self::public_goods(PublicGoodsParams::default()).expect("default params valid"),
            Self::stag_hunt(StagHuntPayoffs::default()),
        ]
    }

    /// The four social dilemmas (every built-in except stag hunt).
    pub fn dilemmas() -> Vec<Self> {
        let mut games = Self::builtins();
        games.retain(|g| g.name() != "stag_hunt");
        games
    }
}

#[derive(Serialize, Deserialize)]
struct GameDocument {
    schema: u32,
    game: Game,
}

/// Parameters for [`Game::public_goods`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublicGoodsParams {
    pub players: usize,
    pub multiplier: f64,
}

impl Default for PublicGoodsParams {
    fn default() -> Self {
        Self { players: 3, multiplier: 1.5 }
    }
}

/// Payoff matrix for [`Game::stag_hunt`]. Field names read as
/// (my action, their action) from the row player's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagHuntPayoffs {
    pub stag_stag: f64,
    pub stag_hare: f64,
    pub hare_stag: f64,
    pub hare_hare: f64,
}

impl Default for StagHuntPayoffs {
    fn default() -> Self {
        Self { stag_stag: 5.0, stag_hare: 0.0, hare_stag: 4.0, hare_hare: 4.0 }
    }
}

/// Iterator over pure profiles in row-major order.
pub struct ProfileIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for ProfileIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                self.next = None;
                return Some(current);
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                break;
            }
            succ[i] = 0;
        }
        self.next = Some(succ);
        Some(current)
    }
}

/// A mixed strategy as integer percentage points per action, summing to
/// exactly 100. This is the wire format agents speak; no fractional or
/// renormalized weights are ever accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedAction {
    weights: Vec<u32>,
}

impl MixedAction {
    pub fn new(weights: Vec<u32>) -> Result<Self, GameError> {
        let sum: u32 = weights.iter().sum();
        if sum != 100 {
            return Err(GameError::WeightSum(sum));
        }
        Ok(Self { weights })
    }

    /// Point mass on one action.
    pub fn pure(action: usize, num_actions: usize) -> Self {
        let mut weights = vec![0; num_actions];
        weights[action] = 100;
        Self { weights }
    }

    /// Near-uniform split: 100 does not always divide evenly, so the
    /// remainder goes one point at a time to the lowest-indexed actions
    /// (3 actions -> 34/33/33).
    pub fn uniform(num_actions: usize) -> Self {
        let base = 100 / num_actions as u32;
        let rem = 100 % num_actions as u32;
        let weights =
            (0..num_actions as u32).map(|i| if i < rem { base + 1 } else { base }).collect();
        Self { weights }
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn num_actions(&self) -> usize {
        self.weights.len()
    }

    /// Probability of one action as a float in [0, 1].
    pub fn prob(&self, action: usize) -> f64 {
        self.weights[action] as f64 / 100.0
    }

    /// Samples an action index. Draws one integer in [0, 100) and walks the
    /// cumulative weights, so equal seeds give equal picks.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let draw = rng.random_range(0..100u32);
        let mut acc = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            acc += w;
            if draw < acc {
                return i;
            }
        }
        // Unreachable for valid weights; defend against a zero tail anyway.
        self.weights.len() - 1
    }
}

/// One mixed action per seat.
pub type StrategyProfile = Vec<MixedAction>;

/// Validates that a strategy profile matches the game's seat count and
/// per-seat action counts.
pub fn check_profile_shape(game: &Game, profile: &StrategyProfile) -> Result<(), GameError> {
    if profile.len() != game.players() {
        return Err(GameError::WeightCount { got: profile.len(), want: game.players() });
    }
    for (i, mix) in profile.iter().enumerate() {
        if mix.num_actions() != game.num_actions(i) {
            return Err(GameError::WeightCount {
                got: mix.num_actions(),
                want: game.num_actions(i),
            });
        }
    }
    Ok(())
}

/// Expected payoff per player under independent mixing.
pub fn expected_utility(game: &Game, profile: &StrategyProfile) -> Result<Vec<f64>, GameError> {
    check_profile_shape(game, profile)?;
    let mut out = vec![0.0; game.players()];
    for pure in game.profiles() {
        let mut p = 1.0;
        for (i, &a) in pure.iter().enumerate() {
            p *= profile[i].prob(a);
        }
        if p == 0.0 {
            continue;
        }
        for (i, u) in out.iter_mut().enumerate() {
            *u += p * game.payoff(&pure, i);
        }
    }
    Ok(out)
}

/// Samples one pure action per seat.
pub fn sample_profile<R: Rng + ?Sized>(profile: &StrategyProfile, rng: &mut R) -> Vec<usize> {
    profile.iter().map(|m| m.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prisoners_matrix_matches_reference() {
        let g = Game::prisoners();
        assert_eq!(g.payoff_vector(&[0, 0]), vec![2.0, 2.0]);
        assert_eq!(g.payoff_vector(&[0, 1]), vec![0.0, 3.0]);
        assert_eq!(g.payoff_vector(&[1, 0]), vec![3.0, 0.0]);
        assert_eq!(g.payoff_vector(&[1, 1]), vec![1.0, 1.0]);
    }

    #[test]
    fn travelers_matrix_matches_reference() {
        let g = Game::travelers();
        // equal claims pay face value
        for a in 0..4 {
            let face = (a + 2) as f64;
            assert_eq!(g.payoff_vector(&[a, a]), vec![face, face]);
        }
        // ($3, $4): lower claimer gets 3+2, higher gets 3-2
        assert_eq!(g.payoff_vector(&[1, 2]), vec![5.0, 1.0]);
        assert_eq!(g.payoff_vector(&[2, 1]), vec![1.0, 5.0]);
        // ($2, $5)
        assert_eq!(g.payoff_vector(&[0, 3]), vec![4.0, 0.0]);
        // ($4, $5)
        assert_eq!(g.payoff_vector(&[2, 3]), vec![6.0, 2.0]);
    }

    #[test]
    fn trust_matrix_matches_reference() {
        let g = Game::trust();
        assert_eq!(g.payoff_vector(&[0, 0]), vec![10.0, 10.0]);
        assert_eq!(g.payoff_vector(&[0, 1]), vec![0.0, 20.0]);
        assert_eq!(g.payoff_vector(&[1, 0]), vec![6.0, 2.0]);
        assert_eq!(g.payoff_vector(&[1, 1]), vec![4.0, 4.0]);
    }

    #[test]
    fn public_goods_formula() {
        let g = Game::public_goods(PublicGoodsParams::default()).unwrap();
        // all contribute: 1.5 * 3/3 = 1.5 each
        assert_eq!(g.payoff_vector(&[0, 0, 0]), vec![1.5, 1.5, 1.5]);
        // nobody does: 1 each
        assert_eq!(g.payoff_vector(&[1, 1, 1]), vec![1.0, 1.0, 1.0]);
        // one defector among two contributors: share = 1.5*2/3 = 1
        assert_eq!(g.payoff_vector(&[0, 1, 0]), vec![1.0, 2.0, 1.0]);
        // one contributor: share = 0.5
        assert_eq!(g.payoff_vector(&[1, 0, 1]), vec![1.5, 0.5, 1.5]);
        // unilateral defection from full cooperation gains 1 - multiplier/n
        let coop = g.payoff(&[0, 0, 0], 0);
        let dev = g.payoff(&[1, 0, 0], 0);
        assert_eq!(dev - coop, 1.0 - 1.5 / 3.0);
    }

    #[test]
    fn public_goods_rejects_bad_multiplier() {
        assert!(Game::public_goods(PublicGoodsParams { players: 3, multiplier: 3.0 }).is_err());
        assert!(Game::public_goods(PublicGoodsParams { players: 3, multiplier: 1.0 }).is_err());
    }

    #[test]
    fn stag_hunt_default_matrix() {
        let g = Game::stag_hunt(StagHuntPayoffs::default());
        assert_eq!(g.payoff_vector(&[0, 0]), vec![5.0, 5.0]);
        assert_eq!(g.payoff_vector(&[0, 1]), vec![0.0, 4.0]);
        assert_eq!(g.payoff_vector(&[1, 0]), vec![4.0, 0.0]);
        assert_eq!(g.payoff_vector(&[1, 1]), vec![4.0, 4.0]);
    }

    #[test]
    fn normalization_endpoints() {
        for g in Game::builtins() {
            for i in 0..g.players() {
                let c = g.payoff(g.coop_profile(), i);
                let d = g.payoff(g.defect_profile(), i);
                assert_eq!(g.normalize_payoff(i, c), 1.0, "{} player {i}", g.name());
                assert_eq!(g.normalize_payoff(i, d), 0.0, "{} player {i}", g.name());
            }
        }
    }

    #[test]
    fn mixed_action_validation() {
        assert!(MixedAction::new(vec![50, 50]).is_ok());
        assert!(matches!(MixedAction::new(vec![50, 49]), Err(GameError::WeightSum(99))));
        assert_eq!(MixedAction::uniform(3).weights(), &[34, 33, 33]);
        assert_eq!(MixedAction::uniform(2).weights(), &[50, 50]);
        assert_eq!(MixedAction::uniform(4).weights(), &[25, 25, 25, 25]);
    }

    #[test]
    fn expected_utility_pure_profiles_match_tensor() {
        let g = Game::travelers();
        for pure in g.profiles() {
            let profile: StrategyProfile =
                pure.iter().map(|&a| MixedAction::pure(a, 4)).collect();
            let eu = expected_utility(&g, &profile).unwrap();
            assert_eq!(eu, g.payoff_vector(&pure));
        }
    }

    #[test]
    fn expected_utility_mixes() {
        let g = Game::prisoners();
        // row mixes 50/50, column defects: 0.5*0 + 0.5*1 = 0.5 for row
        let profile = vec![
            MixedAction::new(vec![50, 50]).unwrap(),
            MixedAction::pure(1, 2),
        ];
        let eu = expected_utility(&g, &profile).unwrap();
        assert_eq!(eu, vec![0.5, 2.0]);
    }

    #[test]
    fn sampling_respects_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = MixedAction::pure(2, 4);
        for _ in 0..50 {
            assert_eq!(m.sample(&mut rng), 2);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let m = MixedAction::new(vec![30, 40, 30]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| m.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = [0usize; 3];
        for _ in 0..2000 {
            seen[m.sample(&mut rng)] += 1;
        }
        // 30/40/30 split should be roughly respected
        assert!(seen[1] > seen[0] && seen[1] > seen[2]);
        assert!(seen.iter().all(|&c| c > 400));
    }

    #[test]
    fn document_round_trip() {
        for g in Game::builtins() {
            let doc = g.to_document();
            let back = Game::from_document(&doc).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn document_rejects_bad_schema() {
        let doc = Game::prisoners().to_document().replace("schema = 1", "schema = 9");
        assert!(matches!(Game::from_document(&doc), Err(GameError::BadSchema(9))));
    }

    #[test]
    fn by_name_covers_builtins() {
        for g in Game::builtins() {
            let lookup = Game::by_name(g.name()).unwrap();
            assert_eq!(g, lookup);
        }
        assert!(Game::by_name("chess").is_err());
    }
}
