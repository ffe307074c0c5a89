//! Tournament engine and analysis toolkit for matrix-game social dilemmas
//! played under cooperation-sustaining mechanisms.
//!
//! The pipeline in one breath: build a benchmark [`game::Game`], wrap it in
//! a [`mechanism`] (repeated play, reputation matching, a mediator that
//! players may delegate to, or payment contracts), run episodes between
//! [`agent`]s (scripted strategies or chat-backed models speaking a strict
//! JSON wire format), collect the cross-play results into a metagame tensor
//! via [`tournament`], and score the agent population with the [`metrics`]
//! suite (mean payoffs, replicator-dynamics fitness, deviation ratings).
//! [`equilibrium`] holds the dominance/Nash machinery used both by analysis
//! and by the mechanism verifiers.

pub mod agent;
pub mod episode;
pub mod equilibrium;
pub mod game;
pub mod history;
pub mod mechanism;

pub use agent::{AgentKind, Decider, DecisionRequest, DecisionResponse, Phase};
pub use episode::{run_episode, EpisodeRecord, EpisodeStatus};
pub use game::{Game, MixedAction, StrategyProfile};
pub use mechanism::{MechanismConfig, MechanismVariant};
