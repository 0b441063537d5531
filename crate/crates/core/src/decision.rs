//! Utility operators and expected utility over a quantum-like network.

use crate::error::{Error, Result};
use crate::network::{Assignment, JointDistribution};
use crate::quantum::{build_superposition, density, quantum_marginal_family, PhaseAssignment};

/// The decision variable and its actions (the variable's states, in order).
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    variable: String,
    variable_index: usize,
    actions: Vec<String>,
}

impl DecisionRule {
    pub fn new(joint: &JointDistribution, variable: &str) -> Result<Self> {
        let variable_index = joint.variable_index(variable)?;
        Ok(Self {
            variable: variable.to_string(),
            variable_index,
            actions: joint.variables()[variable_index].states().to_vec(),
        })
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_index(&self, action: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == action)
            .ok_or_else(|| Error::UnknownState {
                variable: self.variable.clone(),
                state: action.to_string(),
            })
    }

    /// Basis states in which the decision variable takes `action`.
    fn action_mask(&self, joint: &JointDistribution, action: usize) -> Vec<bool> {
        (0..joint.len())
            .map(|i| joint.basis_state(i)[self.variable_index] == action)
            .collect()
    }
}

/// Diagonal payoff operator for one action. Entries on basis states where the
/// action is not taken are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityOperator {
    action: String,
    diagonal: Vec<f64>,
}

impl UtilityOperator {
    pub fn new(joint: &JointDistribution, rule: &DecisionRule, action: &str, diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.len() != joint.len() {
            return Err(Error::LengthMismatch {
                expected: joint.len(),
                actual: diagonal.len(),
            });
        }
        if let Some(&bad) = diagonal.iter().find(|u| !u.is_finite()) {
            return Err(Error::NonFiniteUtility(bad));
        }
        let a = rule.action_index(action)?;
        let mask = rule.action_mask(joint, a);
        if let Some(index) = (0..joint.len()).find(|&i| !mask[i] && diagonal[i] != 0.0) {
            return Err(Error::InconsistentOperator {
                action: action.to_string(),
                index,
            });
        }
        Ok(Self {
            action: action.to_string(),
            diagonal,
        })
    }

    /// Builds the operator from sparse (complete assignment, payoff) entries;
    /// unspecified basis states get 0.
    pub fn from_entries(
        joint: &JointDistribution,
        rule: &DecisionRule,
        action: &str,
        entries: &[(Assignment, f64)],
    ) -> Result<Self> {
        let mut diagonal = vec![0.0; joint.len()];
        for (assignment, payoff) in entries {
            diagonal[joint.index_of(assignment)?] = *payoff;
        }
        Self::new(joint, rule, action, diagonal)
    }

    pub fn zero(joint: &JointDistribution, rule: &DecisionRule, action: &str) -> Result<Self> {
        Self::new(joint, rule, action, vec![0.0; joint.len()])
    }

    pub fn action(&self) -> &str {
        &self.action
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            action: self.action.clone(),
            diagonal: self.diagonal.iter().map(|u| u * k).collect(),
        }
    }
}

/// `Σ_i p_i u_i`.
pub fn classical_expected_utility(joint: &JointDistribution, op: &UtilityOperator) -> Result<f64> {
    if op.diagonal.len() != joint.len() {
        return Err(Error::LengthMismatch {
            expected: joint.len(),
            actual: op.diagonal.len(),
        });
    }
    Ok(joint.probabilities().iter().zip(&op.diagonal).map(|(p, u)| p * u).sum())
}

/// `Tr[ρ̃_a U_a]`, where `ρ̃_a` is the density matrix projected onto the
/// action's basis states and rescaled so its trace is the quantum marginal
/// `Pr_q(a)`.
///
/// For a diagonal operator this is `Pr_q(a) · Σ_{i∈a} p_i u_i / Σ_{i∈a} p_i`:
/// interference moves the weight of the action, never the conditional mean
/// payoff within it.
pub fn quantum_expected_utility(
    joint: &JointDistribution,
    phases: &PhaseAssignment,
    op: &UtilityOperator,
    rule: &DecisionRule,
) -> Result<f64> {
    let a = rule.action_index(&op.action)?;
    let family = quantum_marginal_family(joint, phases, &rule.variable)?;
    weighted_utility(joint, phases, op, rule, a, family.results[a].probability)
}

fn weighted_utility(
    joint: &JointDistribution,
    phases: &PhaseAssignment,
    op: &UtilityOperator,
    rule: &DecisionRule,
    action: usize,
    probability: f64,
) -> Result<f64> {
    if op.diagonal.len() != joint.len() {
        return Err(Error::LengthMismatch {
            expected: joint.len(),
            actual: op.diagonal.len(),
        });
    }
    let rho = density(&build_superposition(joint, phases)?);
    let mask = rule.action_mask(joint, action);
    // projected density P ρ P keeps only the action's diagonal block
    let (mut trace_pu, mut trace_p) = (0.0, 0.0);
    for i in (0..joint.len()).filter(|&i| mask[i]) {
        let rho_ii = rho.get(i, i).re;
        trace_pu += rho_ii * op.diagonal[i];
        trace_p += rho_ii;
    }
    if trace_p <= 0.0 {
        return Err(Error::NoClassicalSupport(op.action.clone()));
    }
    Ok(probability * trace_pu / trace_p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedUtilityResult {
    pub actions: Vec<String>,
    pub probabilities: Vec<f64>,
    pub utilities: Vec<f64>,
    pub chosen: usize,
    /// Top utility minus runner-up; 0 for a single action.
    pub margin: f64,
}

impl ExpectedUtilityResult {
    pub fn chosen_action(&self) -> &str {
        &self.actions[self.chosen]
    }
}

/// Index of the largest value (first wins ties) and its margin over the
/// runner-up.
pub(crate) fn argmax_with_margin(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    let runner_up = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = if runner_up.is_finite() {
        values[best] - runner_up
    } else {
        0.0
    };
    (best, margin)
}

/// Quantum-like expected utility of every action and the maximizing choice.
/// `operators` must hold exactly one operator per action, in any order.
pub fn meu_decision(
    joint: &JointDistribution,
    phases: &PhaseAssignment,
    operators: &[UtilityOperator],
    rule: &DecisionRule,
) -> Result<ExpectedUtilityResult> {
    let ordered = order_operators(operators, rule)?;
    let family = quantum_marginal_family(joint, phases, &rule.variable)?;
    let probabilities = family.probabilities();
    let utilities = ordered
        .iter()
        .enumerate()
        .map(|(a, op)| weighted_utility(joint, phases, op, rule, a, probabilities[a]))
        .collect::<Result<Vec<_>>>()?;
    let (chosen, margin) = argmax_with_margin(&utilities);
    Ok(ExpectedUtilityResult {
        actions: rule.actions.clone(),
        probabilities,
        utilities,
        chosen,
        margin,
    })
}

pub(crate) fn order_operators<'a>(
    operators: &'a [UtilityOperator],
    rule: &DecisionRule,
) -> Result<Vec<&'a UtilityOperator>> {
    let mut slots: Vec<Option<&UtilityOperator>> = vec![None; rule.actions.len()];
    for op in operators {
        let a = rule.action_index(&op.action)?;
        if slots[a].replace(op).is_some() {
            return Err(Error::DuplicateOperator(op.action.clone()));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(a, op)| op.ok_or_else(|| Error::MissingOperator(rule.actions[a].clone())))
        .collect()
}
