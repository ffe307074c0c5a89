//! Prompt rendering: turns a [`DecisionRequest`] into the text an external
//! agent sees. Every decision point shares the same skeleton — a setup
//! block describing the base game from the acting seat's perspective,
//! then a "Here is the twist:" block for whatever the mechanism adds
//! (history windows, ballot slates, the contract in force), with the
//! output schema either in the system message (act phases) or embedded in
//! the task block (proposal, vote, and sign phases).
//!
//! Rendering is deterministic and golden-file tested; tests pin both the
//! full templates and the history layouts (the flat per-round window for
//! fixed partners and the glyph trees for random matching).

use crate::game::{Game, MixedAction, PayoffText};
use crate::history::{HistoryNode, HistoryTree, HistoryView};
use crate::mechanism::{delegate_action, ContractSpec, MediatorSpec};

use super::transport::ChatMessage;
use super::{AgentError, DecisionRequest, MechanismContext, Phase, ReasoningMode};

/// System message for act phases: how to answer with a mixed action.
pub const ACTION_SCHEMA: &str = "Instruction:\n\
- Choose a probability distribution over the provided actions each round.\n\
- Output must contain a valid JSON object at the end.\n\
- Keys must be the action names exactly as given.\n\
- Values must be percentage points given in integers.\n\
- The values must sum to exactly 100.\n\
\n\
Format requirement:\n\
Return exactly one JSON object, for example:\n\
{\"A0\": <INT>, \"A1\": <INT>, ...}";

/// Appended for agents asked to reason before answering.
pub const COT_INSTRUCTION: &str = "Think about the question step by step.\n\
Break it down into small steps.\n\
Explain your reasoning, and then provide the final answer.";

/// Appended for agents asked for the bare answer.
pub const DIRECT_INSTRUCTION: &str = "Please ONLY provide the output to the above question.\n\
DO NOT provide any additional text or explanation.";

/// Renders the user-facing prompt body for one decision point.
pub fn render_prompt(request: &DecisionRequest<'_>) -> Result<String, AgentError> {
    request.validate()?;
    let mut text = game_block(request.game, request.seat);
    if let Some(twist) = twist_block(request) {
        text.push_str("\n\n");
        text.push_str(&twist);
    }
    Ok(text)
}

/// Full message list for a transport call: the action schema as a system
/// message on act phases, then the prompt body with the reasoning (or
/// answer-only) instruction appended.
pub fn build_messages(
    request: &DecisionRequest<'_>,
    reasoning: ReasoningMode,
) -> Result<Vec<ChatMessage>, AgentError> {
    let body = render_prompt(request)?;
    let instruction = match reasoning {
        ReasoningMode::StepByStep => COT_INSTRUCTION,
        ReasoningMode::Direct => DIRECT_INSTRUCTION,
    };
    let mut messages = Vec::new();
    if request.phase == Phase::Act {
        messages.push(ChatMessage::system(ACTION_SCHEMA));
    }
    messages.push(ChatMessage::user(format!("{body}\n\n{instruction}")));
    Ok(messages)
}

/// Formats a payoff or parameter without float noise: integers drop the
/// point (`2`, not `2.0`), everything else keeps its shortest form.
pub fn format_number(x: f64) -> String {
    let rounded = (x * 1e9).round() / 1e9;
    if rounded == rounded.trunc() && rounded.abs() < 1e15 {
        format!("{}", rounded as i64)
    } else {
        format!("{rounded}")
    }
}

fn percent(p: f64) -> String {
    format!("{}%", format_number(p * 100.0))
}

// ---------------------------------------------------------------------------
// Setup block
// ---------------------------------------------------------------------------

fn game_block(game: &Game, seat: usize) -> String {
    let n = game.players();
    let mut s = String::from("Setup:\n");
    if n == 2 {
        s.push_str("You are playing a decision-making game with another player.\n");
    } else {
        s.push_str(&format!(
            "You are playing a decision-making game with {} other players.\n",
            n - 1
        ));
    }
    s.push_str(
        "Your objective is to maximize your total points received in the game described in length below.\n\n",
    );

    s.push_str("Actions available to each player:\n");
    for label in game.action_labels(seat) {
        match &label.annotation {
            Some(note) => s.push_str(&format!("- {}: {note}\n", label.label)),
            None => s.push_str(&format!("- {}\n", label.label)),
        }
    }

    s.push_str("\nBasic game rules:\n");
    if n == 2 {
        s.push_str(
            "1. You and the other player each choose a probability for each action, simultaneously.\n\
             2. After both decisions are locked in, the final action will be drawn from the probability distributions.\n\
             3. Both players receive the points specified in the payoff description below.\n",
        );
    } else {
        s.push_str(
            "1. You and the other players each choose a probability for each action, simultaneously.\n\
             2. After all decisions are locked in, the final action will be drawn from the probability distributions.\n\
             3. All players receive the points specified in the payoff description below.\n",
        );
    }

    s.push_str("\nPayoff description:\n");
    s.push_str(&payoff_description(game, seat));

    s.push_str(&format!(
        "\nIn case player identification becomes relevant, you are playing in the position of Player {} in this game.",
        seat + 1
    ));
    s
}

fn payoff_description(game: &Game, seat: usize) -> String {
    match game.payoff_text() {
        PayoffText::PairList => pair_list(game, seat),
        PayoffText::TravelersRule => String::from(
            "Suppose you choose number X and the other player chooses number Y.\n\
             \x20   - If X = Y: you get X points, the other player gets Y (=X) points.\n\
             \x20   - If X < Y: you get X + 2.0, the other player gets X - 2.0.\n\
             \x20   - If X > Y: you get Y - 2.0, the other player gets Y + 2.0.\n",
        ),
        PayoffText::PublicGoodsFormula { players, multiplier } => {
            let m = format_number(*multiplier);
            format!(
                "Suppose k out of {players} players play A0.\n\
                 \x20   If a player plays A0, their payoff is: {m} * k / {players}.\n\
                 \x20   If a player plays A1, their payoff is: 1 + ({m} * k / {players}).\n"
            )
        }
    }
}

/// One line per action profile, the acting seat's own action varying
/// slowest, each line giving that seat's payoff first.
fn pair_list(game: &Game, seat: usize) -> String {
    let n = game.players();
    let mut s = String::new();
    if n == 2 {
        let other = 1 - seat;
        for mine in 0..game.num_actions(seat) {
            for theirs in 0..game.num_actions(other) {
                let mut profile = vec![0; 2];
                profile[seat] = mine;
                profile[other] = theirs;
                s.push_str(&format!(
                    "\t- If you choose {} and the other player chooses {}: you get {} points, the other player gets {} points.\n",
                    game.action_labels(seat)[mine].label,
                    game.action_labels(other)[theirs].label,
                    format_number(game.payoff(&profile, seat)),
                    format_number(game.payoff(&profile, other)),
                ));
            }
        }
        return s;
    }
    // Many-player pair lists spell out every seat. Built-in games with
    // more than two players describe payoffs by formula instead, so this
    // arm only serves custom game documents.
    for profile in game.profiles() {
        let mut clauses: Vec<String> = vec![format!(
            "you choose {}",
            game.action_labels(seat)[profile[seat]].label
        )];
        for (p, &action) in profile.iter().enumerate() {
            if p != seat {
                clauses.push(format!(
                    "Player {} chooses {}",
                    p + 1,
                    game.action_labels(p)[action].label
                ));
            }
        }
        let mut payouts: Vec<String> =
            vec![format!("you get {} points", format_number(game.payoff(&profile, seat)))];
        for p in 0..n {
            if p != seat {
                payouts.push(format!(
                    "Player {} gets {} points",
                    p + 1,
                    format_number(game.payoff(&profile, p))
                ));
            }
        }
        s.push_str(&format!("\t- If {}: {}.\n", clauses.join(" and "), payouts.join(", ")));
    }
    s
}

// ---------------------------------------------------------------------------
// Twist blocks
// ---------------------------------------------------------------------------

fn twist_block(request: &DecisionRequest<'_>) -> Option<String> {
    match (&request.phase, &request.context) {
        (Phase::Act, MechanismContext::None) => None,
        (Phase::Act, MechanismContext::Repetition { view }) => {
            Some(repetition_twist(request, view))
        }
        (Phase::Act, MechanismContext::Reputation { view }) => {
            Some(reputation_twist(request, view))
        }
        (Phase::Act, MechanismContext::MediatorActive { spec, proposer }) => {
            Some(mediator_active_twist(request.game, spec, *proposer))
        }
        (Phase::Act, MechanismContext::ContractActive { spec, proposer }) => {
            Some(contract_active_twist(request.game, spec, *proposer))
        }
        (Phase::ProposeMediator, _) => Some(mediator_proposal_twist(request.game.players())),
        (Phase::ProposeContract, _) => Some(contract_proposal_twist()),
        (Phase::Vote, MechanismContext::MediatorBallot { proposals }) => {
            Some(mediator_ballot_twist(request.game, proposals))
        }
        (Phase::Vote, MechanismContext::ContractBallot { proposals }) => {
            Some(contract_ballot_twist(request.game, proposals))
        }
        (Phase::Sign, MechanismContext::ContractOffer { spec, proposer }) => {
            Some(contract_sign_twist(request.game, spec, *proposer))
        }
        _ => None,
    }
}

const HISTORY_LEAD_IN: &str = "Next, you find the info available to you about the history of play that is related to you and the other player(s) you are playing with in this upcoming round.";

fn repetition_twist(request: &DecisionRequest<'_>, view: &HistoryView) -> String {
    let mut s = format!(
        "Here is the twist:\n\
         You are playing this game *repeatedly* with the same player(s). The action sampled from your action probability distribution will be visible to those player(s) in future rounds and may influence their decisions.\n\
         After each round, there is a {} chance probability that an additional round will take place. You have already played this game for {} round(s) in the past.",
        percent(request.config.delta),
        view.current_round - 1,
    );
    if !view.own.nodes.is_empty() {
        s.push_str("\n\n");
        s.push_str(HISTORY_LEAD_IN);
        s.push_str("\n\n");
        s.push_str(&flat_history(request.game, &view.own));
    }
    s
}

/// The fixed-partner window: one block per visible round, newest first,
/// participants labeled by seat.
fn flat_history(game: &Game, tree: &HistoryTree) -> String {
    let mut lines = Vec::new();
    for node in &tree.nodes {
        let record = &node.record;
        lines.push(format!("[Round {}] ", record.round));
        for (idx, &agent) in record.participants.iter().enumerate() {
            let name = if agent == tree.subject {
                "You".to_string()
            } else {
                format!("Player {}", agent + 1)
            };
            let label = &game.action_labels(idx)[record.actions[idx]].label;
            lines.push(format!("\t{name}: {label}"));
        }
    }
    lines.join("\n")
}

fn reputation_twist(request: &DecisionRequest<'_>, view: &HistoryView) -> String {
    let game = request.game;
    let viewer = view.own.subject;
    let mut s = format!(
        "Here is the twist:\n\
         You are playing this game *repeatedly* but with varying players who you encounter at random.\n\
         The action sampled from your action probability distribution in the current round will be visible to the players you encounter in future rounds and may influence their decisions.\n\
         After each round, there is a {} chance probability that an additional round will take place. You have already played this game for {} round(s) in the past.",
        percent(request.config.delta),
        view.current_round - 1,
    );

    let any_history = !view.own.nodes.is_empty()
        || view.others.iter().any(|t| !t.nodes.is_empty());
    if any_history {
        s.push_str("\n\n");
        s.push_str(HISTORY_LEAD_IN);
    }

    let names: Vec<String> =
        view.co_players.iter().map(|&c| format!("Agent #{c}")).collect();
    s.push_str(&format!(
        "\n\nYou are playing with {} other agent(s): {}.",
        view.co_players.len(),
        names.join(", ")
    ));

    if !view.own.nodes.is_empty() {
        s.push_str("\n\nYour history of play:\n");
        s.push_str(&render_tree(game, &view.own, viewer));
    }
    for (id, tree) in view.co_players.iter().zip(&view.others) {
        if !tree.nodes.is_empty() {
            s.push_str(&format!("\n\nHistory of play of Agent #{id}:\n"));
            s.push_str(&render_tree(game, tree, viewer));
        }
    }
    s
}

fn agent_name(id: usize, viewer: usize) -> String {
    if id == viewer {
        "You".to_string()
    } else {
        format!("Agent #{id}")
    }
}

/// Renders a history tree with box-drawing glyphs. Each record line puts
/// the tree's subject first; each expansion becomes a "History of X before
/// this match:" child with that agent's earlier records nested below.
fn render_tree(game: &Game, tree: &HistoryTree, viewer: usize) -> String {
    let mut out = String::new();
    render_nodes(game, &tree.nodes, tree.subject, viewer, "", &mut out);
    // Lines are pushed with trailing newlines; the block itself has none.
    out.truncate(out.trim_end_matches('\n').len());
    out
}

fn render_nodes(
    game: &Game,
    nodes: &[HistoryNode],
    subject: usize,
    viewer: usize,
    prefix: &str,
    out: &mut String,
) {
    for (i, node) in nodes.iter().enumerate() {
        let last = i + 1 == nodes.len();
        let glyph = if last { "└─ " } else { "├─ " };
        out.push_str(prefix);
        out.push_str(glyph);
        out.push_str(&record_line(game, node, subject, viewer));
        out.push('\n');

        let child_prefix = format!("{prefix}{}", if last { "   " } else { "│  " });
        for (j, expansion) in node.expansions.iter().enumerate() {
            let exp_last = j + 1 == node.expansions.len();
            let exp_glyph = if exp_last { "└─ " } else { "├─ " };
            out.push_str(&child_prefix);
            out.push_str(exp_glyph);
            out.push_str(&format!(
                "History of {} before this match:\n",
                agent_name(expansion.subject, viewer)
            ));
            let exp_prefix =
                format!("{child_prefix}{}", if exp_last { "   " } else { "│  " });
            render_nodes(game, &expansion.nodes, expansion.subject, viewer, &exp_prefix, out);
        }
    }
}

fn record_line(game: &Game, node: &HistoryNode, subject: usize, viewer: usize) -> String {
    let record = &node.record;
    let mut order: Vec<usize> = Vec::with_capacity(record.participants.len());
    if let Some(own_seat) = record.seat_of(subject) {
        order.push(own_seat);
    }
    for idx in 0..record.participants.len() {
        if !order.contains(&idx) {
            order.push(idx);
        }
    }
    let parts: Vec<String> = order
        .into_iter()
        .map(|idx| {
            format!(
                "{} (played {}, received {}pts)",
                agent_name(record.participants[idx], viewer),
                game.action_labels(idx)[record.actions[idx]].label,
                format_number(record.payoffs[idx]),
            )
        })
        .collect();
    format!("[Round {}] {}", record.round, parts.join(" vs "))
}

// ---------------------------------------------------------------------------
// Mediation
// ---------------------------------------------------------------------------

const MEDIATOR_DELEGATION_RULES: &str = "On top of the original game rules, you will have the option to delegate your move to a mediator.\n\
If you choose to delegate, the mediator will play an action for you based on how many players have delegated to it.\n\
You can also choose to act independently.";

fn mediator_proposal_twist(players: usize) -> String {
    format!(
        "Here is the twist:\n\
         There will be a mediator for this game, and your task now is to design and propose one.\n\
         \n\
         - A mediator is an entity that plays actions on behalf of delegating players.\n\
         - Each player may choose to delegate their move to the mediator or act independently.\n\
         - The mediator observes the number of players delegating to the mediator and then plays the same action for all delegating players.\n\
         \n\
         The other player(s) will also design and propose a mediator. Only one will be present in the game though. Which one will be decided in a separate step later via an approval voting process by you and the other player(s). The winning mediator will be selected uniform at random from those with the maximum number of approvals.\n\
         \n\
         Output Format:\n\
         Return a valid JSON object in a single line:\n\
         {{\"1\": <Action>, ..., \"{players}\": <Action>}} where <Action> is a string like \"A0\", \"A1\" ...\n\
         \n\
         - Keys: the number of players delegating (from 1 to {players}).\n\
         - Values: the action the mediator will play on behalf of delegating players (e.g., \"A0\" or \"A1\" etc.)."
    )
}

fn plan_bullets(game: &Game, spec: &MediatorSpec) -> String {
    let labels = game.action_labels(0);
    let lines: Vec<String> = spec
        .plan
        .iter()
        .enumerate()
        .map(|(i, mix)| {
            let what = describe_mix(mix, |a| labels[a].label.clone());
            format!("\t• If {} player(s) delegate to the mediator, it will play {what}.", i + 1)
        })
        .collect();
    lines.join("\n")
}

/// "action A0" for point masses, an explicit distribution otherwise.
fn describe_mix(mix: &MixedAction, label: impl Fn(usize) -> String) -> String {
    if let Some(action) = mix.weights().iter().position(|&w| w == 100) {
        return format!("action {}", label(action));
    }
    let parts: Vec<String> = mix
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(a, &w)| format!("{} with {w}% probability", label(a)))
        .collect();
    parts.join(", ")
}

fn mediator_ballot_twist(game: &Game, proposals: &[MediatorSpec]) -> String {
    let voters = if game.players() == 2 { "you and the other player" } else { "you and the other players" };
    let blocks: Vec<String> = proposals
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            format!("Mediator proposed by Player {}:\n{}", i + 1, plan_bullets(game, spec))
        })
        .collect();
    format!(
        "Here is the twist:\n\
         {MEDIATOR_DELEGATION_RULES}\n\
         \n\
         But first, {voters} have to decide via an approval voting process which mediator will be present in the game. Your task now is to review each mediator and decide which ones you approve of. The winning mediator will be selected uniform at random from those with the maximum number of approvals.\n\
         \n\
         Here are the mediator designs that have been proposed:\n\
         {}\n\
         \n\
         Output Format:\n\
         Return a valid JSON object with your approvals:\n\
         {{\"M1\": <true/false>, \"M2\": <true/false>, ...}}\n\
         \n\
         - Keys: mediator identifiers (e.g., \"M1\", \"M2\", ...)\n\
         - Values: `true` if you approve, `false` if you don't\n\
         - Ensure all mediators have an entry",
        blocks.join("\n\n")
    )
}

fn mediator_active_twist(game: &Game, spec: &MediatorSpec, proposer: usize) -> String {
    let (_, delegate_label) = delegate_action(game).expect("mediation needs a shared action set");
    format!(
        "Here is the twist:\n\
         On top of the original game rules, you have the option to delegate your move to a mediator.\n\
         If you choose to delegate, the mediator will play an action for you based on how many players have delegated to it.\n\
         You can also choose to act independently.\n\
         \n\
         The available mediator was proposed by Player {} and selected via approval voting among the players. Here is what the mediator would do for the players that delegate to it:\n\
         {}\n\
         \n\
         Consider {delegate_label} as an additional action \"Delegate to Mediator\". Your final mixed strategy should include probability for all actions A0, A1, ..., {delegate_label}.",
        proposer + 1,
        plan_bullets(game, spec),
    )
}

// ---------------------------------------------------------------------------
// Contracting
// ---------------------------------------------------------------------------

fn contract_proposal_twist() -> String {
    String::from(
        "Here is the twist:\n\
         There will be the option for a payment contract in this game, and your task now is to design and propose one.\n\
         \n\
         - A contract is an additional payoff agreement on top of the original game payoffs. It specifies a number for each action that a player can play, indicating one of three cases:\n\
         \x20   * Positive number (+): the player receives an additional payment of X points in total, drawn equally from the other player(s).\n\
         \x20   * Negative number (-): the player pays an additional payment of X points in total, distributed equally among the other player(s).\n\
         \x20   * Zero (0): no additional payments in either direction.\n\
         - Each player may choose to accept the contract as a whole or not.\n\
         - The contract becomes active only if all players accept.\n\
         \n\
         The other player(s) will also design and propose a contract. Only one will be present in the game though. Which one will be decided in a separate step later via an approval voting process by you and the other player(s). The winning contract will be selected uniform at random from those with the maximum number of approvals.\n\
         \n\
         Output Format:\n\
         Return a valid JSON object in a single line:\n\
         {\"A0\": <INT>, \"A1\": <INT>, ...}\n\
         \n\
         - Keys: all available game actions.\n\
         - Values: integers representing the extra payoff for that action.",
    )
}

fn contract_clauses(game: &Game, spec: &ContractSpec) -> String {
    let labels = game.action_labels(0);
    let lines: Vec<String> = spec
        .transfers
        .iter()
        .enumerate()
        .map(|(a, &t)| {
            let label = &labels[a].label;
            match t.cmp(&0) {
                std::cmp::Ordering::Greater => format!(
                    "- If a player chooses {label}, they receive an additional payment of {t} point(s), drawn equally from the other players."
                ),
                std::cmp::Ordering::Less => format!(
                    "- If a player chooses {label}, they pay an additional payment of {} point(s), distributed equally among the other players.",
                    -t
                ),
                std::cmp::Ordering::Equal => format!(
                    "- If a player chooses {label}, there are no additional payments in either direction."
                ),
            }
        })
        .collect();
    lines.join("\n")
}

fn contract_ballot_twist(game: &Game, proposals: &[ContractSpec]) -> String {
    let blocks: Vec<String> = proposals
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            format!("Contract proposed by Player {}:\n{}", i + 1, contract_clauses(game, spec))
        })
        .collect();
    format!(
        "Here is the twist:\n\
         On top of the original game rules, a payment contract can be put in place if the players agree to it via an approval voting process. A contract specifies a payment value for each action that a player can play.\n\
         \n\
         Your task now is to review each proposed contract and decide which ones you approve of. The winning contract will be selected uniform at random from those with the maximum number of approvals.\n\
         \n\
         Here are the contract designs that have been proposed:\n\
         {}\n\
         \n\
         Output Format:\n\
         Return a valid JSON object with your approvals:\n\
         {{\"C1\": <true/false>, \"C2\": <true/false>, ...}}\n\
         \n\
         - Keys: contract identifiers (e.g., \"C1\", \"C2\", ...)\n\
         - Values: `true` if you approve, `false` if you don't\n\
         - Ensure all contracts have an entry",
        blocks.join("\n\n")
    )
}

fn contract_sign_twist(game: &Game, spec: &ContractSpec, proposer: usize) -> String {
    format!(
        "Here is the twist:\n\
         On top of the original game rules, you have the option to sign a payment contract. A contract specifies a payment value for each action that a player can play. Here is the contract that was selected via approval voting (proposed by Player {}):\n\
         {}\n\
         \n\
         At this stage, you are asked to decide whether to sign the contract. The contract becomes active only if all players sign it.\n\
         \n\
         Output Requirement:\n\
         - Respond with a valid JSON object.\n\
         - Format: {{\"sign\": <BOOL>}} where <BOOL> is true or false.",
        proposer + 1,
        contract_clauses(game, spec),
    )
}

fn contract_active_twist(game: &Game, spec: &ContractSpec, proposer: usize) -> String {
    format!(
        "Here is the twist:\n\
         On top of the original game rules, there is a payment contract in place because every player signed it in beforehand. Here is the contract that was selected via approval voting (proposed by Player {}):\n\
         {}\n\
         \n\
         Since this contract directly affects your final payoff, consider the contract when making your strategy decisions!",
        proposer + 1,
        contract_clauses(game, spec),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Game;
    use crate::history::{build_history_view, HistoryOrder, HistoryRecord, ReputationLog};
    use crate::mechanism::{MechanismConfig, MechanismVariant};

    #[test]
    fn numbers_render_without_float_noise() {
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(2.5), "2.5");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-4.0), "-4");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(1.5), "1.5");
        assert_eq!(percent(0.8), "80%");
        assert_eq!(percent(0.95), "95%");
    }

    #[test]
    fn one_shot_prompts_have_no_twist() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::None,
        };
        let text = render_prompt(&req).unwrap();
        assert!(!text.contains("Here is the twist:"));
        assert!(text.ends_with("you are playing in the position of Player 1 in this game."));
        assert!(text
            .contains("\t- If you choose A0 and the other player chooses A0: you get 2 points, the other player gets 2 points."));
    }

    #[test]
    fn pair_lists_follow_the_acting_seat() {
        let game = Game::trust();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let req = DecisionRequest {
            game: &game,
            seat: 1,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::None,
        };
        let text = render_prompt(&req).unwrap();
        // Seat 1's temptation: grabbing against a truster nets 20.
        assert!(text.contains(
            "\t- If you choose A1 and the other player chooses A0: you get 20 points, the other player gets 0 points."
        ));
        assert!(text.ends_with("you are playing in the position of Player 2 in this game."));
    }

    #[test]
    fn first_round_repetition_omits_the_history_section() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::Repetition);
        let log = ReputationLog::new();
        let view = build_history_view(&log, 0, &[1], 1, config.window, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        let text = render_prompt(&req).unwrap();
        assert!(text.contains("for 0 round(s) in the past."));
        assert!(!text.contains("Next, you find the info"));
        assert!(!text.contains("[Round"));
    }

    #[test]
    fn repetition_windows_render_flat_and_newest_first() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::Repetition);
        let mut log = ReputationLog::new();
        for round in 1..=4 {
            log.push(HistoryRecord {
                round,
                participants: vec![0, 1],
                actions: vec![0, 1],
                payoffs: vec![0.0, 3.0],
            });
        }
        let view = build_history_view(&log, 0, &[1], 5, config.window, HistoryOrder::FirstOrder);
        let req = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::Repetition { view },
        };
        let text = render_prompt(&req).unwrap();
        // Window of 3: rounds 4, 3, 2 — round 1 has aged out.
        let four = text.find("[Round 4] ").unwrap();
        let three = text.find("[Round 3] ").unwrap();
        let two = text.find("[Round 2] ").unwrap();
        assert!(four < three && three < two);
        assert!(!text.contains("[Round 1]"));
        assert!(text.contains("[Round 4] \n\tYou: A0\n\tPlayer 2: A1"));
    }

    #[test]
    fn act_messages_carry_the_schema_and_task_messages_do_not() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::Contracting);
        let act = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::Act,
            context: MechanismContext::None,
        };
        let messages = build_messages(&act, ReasoningMode::StepByStep).unwrap();
        assert_eq!(messages.len(), 2);
        assert_eq!(messages[0].content, ACTION_SCHEMA);
        assert!(messages[1].content.ends_with(COT_INSTRUCTION));

        let propose = DecisionRequest {
            game: &game,
            seat: 0,
            config: &config,
            phase: Phase::ProposeContract,
            context: MechanismContext::None,
        };
        let messages = build_messages(&propose, ReasoningMode::Direct).unwrap();
        assert_eq!(messages.len(), 1);
        assert!(messages[0].content.contains("Output Format:"));
        assert!(messages[0].content.ends_with(DIRECT_INSTRUCTION));
    }
}
