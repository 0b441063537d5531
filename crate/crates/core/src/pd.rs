//! The two-player Prisoner's Dilemma scenario with unknown opponent move.
//!
//! `P1` is the opponent's move, `P2` the player's decision. Conditional rows
//! are the observed defection rates when the opponent's move is known; the
//! payoffs are the player's outcome for each joint move.

use crate::decision::{DecisionRule, UtilityOperator};
use crate::error::Result;
use crate::network::{Assignment, BeliefNetwork, ConditionalTable, JointDistribution, TableRow, Variable};

pub const DEFECT: &str = "Def";
pub const COOPERATE: &str = "Coop";
pub const OPPONENT: &str = "P1";
pub const PLAYER: &str = "P2";

/// Observed Pr(P2 = Def) when P1 is known to defect.
pub const OBSERVED_KNOWN_DEFECT: f64 = 0.97;
/// Observed Pr(P2 = Def) when P1 is known to cooperate.
pub const OBSERVED_KNOWN_COOPERATE: f64 = 0.84;
/// Observed Pr(P2 = Def) when P1's move is unknown.
pub const OBSERVED_UNKNOWN: f64 = 0.63;
/// Shared interference angle reported to reproduce the unknown condition.
pub const REPORTED_THETA: f64 = 2.8057;

/// Player payoffs as (P1 move, P2 move, payoff).
pub const PAYOFFS: [(&str, &str, f64); 4] = [
    (DEFECT, DEFECT, 30.0),
    (DEFECT, COOPERATE, 25.0),
    (COOPERATE, DEFECT, 85.0),
    (COOPERATE, COOPERATE, 36.0),
];

pub fn network() -> BeliefNetwork {
    BeliefNetwork::new(
        vec![
            Variable::new(OPPONENT, [DEFECT, COOPERATE]),
            Variable::new(PLAYER, [DEFECT, COOPERATE]),
        ],
        vec![
            ConditionalTable::prior(OPPONENT, vec![0.5, 0.5]),
            ConditionalTable::new(
                PLAYER,
                [OPPONENT],
                vec![
                    TableRow::new([DEFECT], vec![OBSERVED_KNOWN_DEFECT, 1.0 - OBSERVED_KNOWN_DEFECT]),
                    TableRow::new(
                        [COOPERATE],
                        vec![OBSERVED_KNOWN_COOPERATE, 1.0 - OBSERVED_KNOWN_COOPERATE],
                    ),
                ],
            ),
        ],
    )
}

pub fn rule(joint: &JointDistribution) -> Result<DecisionRule> {
    DecisionRule::new(joint, PLAYER)
}

/// One diagonal utility operator per player action, in action order.
pub fn utility_operators(joint: &JointDistribution) -> Result<Vec<UtilityOperator>> {
    let rule = rule(joint)?;
    rule.actions()
        .iter()
        .map(|action| {
            let entries: Vec<(Assignment, f64)> = PAYOFFS
                .iter()
                .filter(|(_, mine, _)| mine == action)
                .map(|&(theirs, mine, u)| (Assignment::from([(OPPONENT, theirs), (PLAYER, mine)]), u))
                .collect();
            UtilityOperator::from_entries(joint, &rule, action, &entries)
        })
        .collect()
}
