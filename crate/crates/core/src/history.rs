//! Play histories and the bounded views served to agents.
//!
//! Repetition shows a flat window of the fixed matchup. The reputation
//! variants share one population-wide [`ReputationLog`] and serve per-agent
//! views: first-order views list each participant's own recent records;
//! higher-order views recursively expand every counterparty's history
//! before the match in question, so an agent can see how its partners
//! treated *their* partners, and so on down the window.

use serde::{Deserialize, Serialize};

/// One resolved round for one group: who sat where, what they played, what
/// they received (raw payoffs, before any normalization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    /// 1-based global round number.
    pub round: usize,
    /// Participant ids in seat order (pool member indices, or seat indices
    /// for fixed-partner play).
    pub participants: Vec<usize>,
    /// Realized action index per seat.
    pub actions: Vec<usize>,
    /// Raw payoff per seat.
    pub payoffs: Vec<f64>,
}

impl HistoryRecord {
    /// Seat of `agent` within this record, if present.
    pub fn seat_of(&self, agent: usize) -> Option<usize> {
        self.participants.iter().position(|&p| p == agent)
    }
}

/// Append-only episode-wide record store for reputation play.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReputationLog {
    records: Vec<HistoryRecord>,
}

impl ReputationLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: HistoryRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    /// Records involving `agent` with round in [min_round, before), newest
    /// first.
    fn involving(&self, agent: usize, before: usize, min_round: usize) -> Vec<&HistoryRecord> {
        let mut out: Vec<&HistoryRecord> = self
            .records
            .iter()
            .filter(|r| r.round < before && r.round >= min_round && r.seat_of(agent).is_some())
            .collect();
        out.sort_by_key(|r| std::cmp::Reverse(r.round));
        out
    }
}

/// View depth for reputation histories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryOrder {
    /// Own records only, per participant.
    FirstOrder,
    /// Counterparties expand recursively into their pre-match records.
    HigherOrder,
}

/// History subtree for one subject agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryTree {
    pub subject: usize,
    pub nodes: Vec<HistoryNode>,
}

/// One record plus (for higher-order views) each counterparty's own history
/// from before that match. Expansions that would be empty are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryNode {
    pub record: HistoryRecord,
    pub expansions: Vec<HistoryTree>,
}

/// Everything an agent gets to see about the past when deciding in a
/// reputation round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryView {
    /// The round about to be played (1-based).
    pub current_round: usize,
    /// Oldest round any served record may carry.
    pub window_start: usize,
    /// Current co-player ids, in seat order with the subject skipped.
    pub co_players: Vec<usize>,
    /// The subject's own history.
    pub own: HistoryTree,
    /// One tree per current co-player, same order as `co_players`.
    pub others: Vec<HistoryTree>,
}

/// Builds the view served to `subject` before playing `current_round`
/// against `co_players`. Records older than `window` rounds before the
/// current round never appear, at any nesting depth; recursion only ever
/// looks strictly before the expanded match, and an (agent, bound) pair
/// already on the expansion path is never re-expanded.
pub fn build_history_view(
    log: &ReputationLog,
    subject: usize,
    co_players: &[usize],
    current_round: usize,
    window: usize,
    order: HistoryOrder,
) -> HistoryView {
    let window_start = current_round.saturating_sub(window).max(1);
    let mut path = vec![(subject, current_round)];
    let own = build_tree(log, subject, current_round, window_start, order, &mut path);
    let others = co_players
        .iter()
        .map(|&c| {
            let mut path = vec![(c, current_round)];
            build_tree(log, c, current_round, window_start, order, &mut path)
        })
        .collect();
    HistoryView {
        current_round,
        window_start,
        co_players: co_players.to_vec(),
        own,
        others,
    }
}

fn build_tree(
    log: &ReputationLog,
    subject: usize,
    before: usize,
    min_round: usize,
    order: HistoryOrder,
    path: &mut Vec<(usize, usize)>,
) -> HistoryTree {
    let mut nodes = Vec::new();
    for record in log.involving(subject, before, min_round) {
        let mut expansions = Vec::new();
        if order == HistoryOrder::HigherOrder {
            for &other in &record.participants {
                if other == subject {
                    continue;
                }
                let key = (other, record.round);
                if path.contains(&key) {
                    continue;
                }
                path.push(key);
                let sub = build_tree(log, other, record.round, min_round, order, path);
                path.pop();
                if !sub.nodes.is_empty() {
                    expansions.push(sub);
                }
            }
        }
        nodes.push(HistoryNode { record: record.clone(), expansions });
    }
    HistoryTree { subject, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked example: prisoners-style payoffs, 10 rounds played, window
    /// 3, subject 0 ("You") about to face agent 10 in round 11.
    fn example_log() -> ReputationLog {
        let mut log = ReputationLog::new();
        let rec = |round, a: usize, b: usize, act: [usize; 2], pay: [f64; 2]| HistoryRecord {
            round,
            participants: vec![a, b],
            actions: act.to_vec(),
            payoffs: pay.to_vec(),
        };
        log.push(rec(8, 0, 8, [0, 1], [0.0, 3.0]));
        log.push(rec(8, 10, 9, [1, 0], [3.0, 0.0]));
        log.push(rec(8, 6, 7, [1, 1], [1.0, 1.0]));
        log.push(rec(9, 0, 6, [1, 1], [1.0, 1.0]));
        log.push(rec(9, 10, 9, [0, 0], [2.0, 2.0]));
        log.push(rec(10, 0, 10, [0, 0], [2.0, 2.0]));
        log
    }

    fn rounds(tree: &HistoryTree) -> Vec<usize> {
        tree.nodes.iter().map(|n| n.record.round).collect()
    }

    #[test]
    fn higher_order_view_matches_worked_example() {
        let log = example_log();
        let view = build_history_view(&log, 0, &[10], 11, 3, HistoryOrder::HigherOrder);
        assert_eq!(view.window_start, 8);

        // Own records: rounds 10, 9, 8, newest first.
        assert_eq!(rounds(&view.own), vec![10, 9, 8]);

        // Round 10 vs agent 10: agent 10's pre-match history holds rounds
        // 9 and 8; its round-9 match vs agent 9 expands once more into
        // agent 9's round-8 record, which expands no further (the window
        // ends at round 8).
        let r10 = &view.own.nodes[0];
        assert_eq!(r10.expansions.len(), 1);
        let a10 = &r10.expansions[0];
        assert_eq!(a10.subject, 10);
        assert_eq!(rounds(a10), vec![9, 8]);
        let a9 = &a10.nodes[0].expansions[0];
        assert_eq!(a9.subject, 9);
        assert_eq!(rounds(a9), vec![8]);
        assert!(a9.nodes[0].expansions.is_empty());
        assert!(a10.nodes[1].expansions.is_empty());

        // Round 9 vs agent 6 expands into agent 6's round-8 record only.
        let r9 = &view.own.nodes[1];
        let a6 = &r9.expansions[0];
        assert_eq!(a6.subject, 6);
        assert_eq!(rounds(a6), vec![8]);

        // Round 8 vs agent 8: nothing earlier is visible, no expansion.
        assert!(view.own.nodes[2].expansions.is_empty());

        // The co-player's tree mirrors the listing: its round-10 match
        // expands "You" (rounds 9 and 8), not the subject itself.
        assert_eq!(view.others.len(), 1);
        let them = &view.others[0];
        assert_eq!(them.subject, 10);
        assert_eq!(rounds(them), vec![10, 9, 8]);
        let you = &them.nodes[0].expansions[0];
        assert_eq!(you.subject, 0);
        assert_eq!(rounds(you), vec![9, 8]);
    }

    #[test]
    fn first_order_view_has_no_expansions() {
        let log = example_log();
        let view = build_history_view(&log, 0, &[10], 11, 3, HistoryOrder::FirstOrder);
        assert_eq!(rounds(&view.own), vec![10, 9, 8]);
        assert!(view.own.nodes.iter().all(|n| n.expansions.is_empty()));
        let them = &view.others[0];
        assert_eq!(rounds(them), vec![10, 9, 8]);
        assert!(them.nodes.iter().all(|n| n.expansions.is_empty()));
    }

    #[test]
    fn window_truncates_old_rounds_at_every_depth() {
        let mut log = ReputationLog::new();
        // agents 0 and 1 trade rounds 1..=9; agent 2 only played round 5.
        for round in 1..=9 {
            log.push(HistoryRecord {
                round,
                participants: vec![0, 1],
                actions: vec![0, 0],
                payoffs: vec![2.0, 2.0],
            });
        }
        log.push(HistoryRecord {
            round: 5,
            participants: vec![2, 3],
            actions: vec![1, 0],
            payoffs: vec![3.0, 0.0],
        });
        let view = build_history_view(&log, 0, &[1], 10, 3, HistoryOrder::HigherOrder);
        assert_eq!(view.window_start, 7);
        assert_eq!(rounds(&view.own), vec![9, 8, 7]);
        fn assert_bounded(tree: &HistoryTree, min: usize) {
            for node in &tree.nodes {
                assert!(node.record.round >= min, "round {} below window", node.record.round);
                for sub in &node.expansions {
                    assert_bounded(sub, min);
                }
            }
        }
        assert_bounded(&view.own, 7);
        for t in &view.others {
            assert_bounded(t, 7);
        }
        // agent 2's only record is outside the window: empty tree, and the
        // round-5 match never shows up inside expansions either.
        let view2 = build_history_view(&log, 2, &[0], 10, 3, HistoryOrder::HigherOrder);
        assert!(view2.own.nodes.is_empty());
    }

    #[test]
    fn expansions_strictly_precede_their_match() {
        let log = example_log();
        let view = build_history_view(&log, 0, &[10], 11, 3, HistoryOrder::HigherOrder);
        fn check(tree: &HistoryTree, bound: usize) {
            for node in &tree.nodes {
                assert!(node.record.round < bound);
                for sub in &node.expansions {
                    check(sub, node.record.round);
                }
            }
        }
        check(&view.own, 11);
    }

    #[test]
    fn same_round_records_do_not_recurse_into_themselves() {
        // Pathological store: one agent somehow appears in two records of
        // the same round. The path guard keeps expansion finite and never
        // re-expands the same (agent, bound) pair.
        let mut log = ReputationLog::new();
        log.push(HistoryRecord {
            round: 2,
            participants: vec![0, 1],
            actions: vec![0, 1],
            payoffs: vec![0.0, 3.0],
        });
        log.push(HistoryRecord {
            round: 2,
            participants: vec![1, 0],
            actions: vec![0, 0],
            payoffs: vec![2.0, 2.0],
        });
        let view = build_history_view(&log, 0, &[1], 3, 3, HistoryOrder::HigherOrder);
        assert_eq!(view.own.nodes.len(), 2);
    }
}
