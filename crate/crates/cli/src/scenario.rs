//! The JSON scenario format and its conversion to core types.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use qlbn_core::{
    Assignment, BeliefNetwork, ConditionalTable, DecisionRule, JointDistribution, PhaseAssignment, TableRow,
    UtilityOperator, Variable,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const PRISONERS_DILEMMA: &str = include_str!("../scenarios/prisoners_dilemma.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub variables: Vec<VariableSpec>,
    pub cpts: Vec<CptSpec>,
    pub decision: String,
    #[serde(default)]
    pub utilities: Vec<UtilitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<PhaseSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub evidence: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptSpec {
    pub child: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub rows: Vec<RowSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    #[serde(default)]
    pub given: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    pub action: String,
    #[serde(default)]
    pub entries: Vec<PayoffSpec>,
}

/// Payoff of one complete assignment. Basis states not listed pay 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    pub assignment: BTreeMap<String, String>,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseSpec {
    PerState {
        theta: Vec<f64>,
    },
    PerOutcome {
        /// Defaults to the decision variable.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
        angles: BTreeMap<String, f64>,
    },
}

/// Phases resolved against the network, angles in state order.
#[derive(Debug, Clone, PartialEq)]
pub enum Phases {
    PerState(Vec<f64>),
    PerOutcome { variable: String, angles: Vec<f64> },
}

impl Phases {
    pub fn assignment(&self, joint: &JointDistribution) -> qlbn_core::Result<PhaseAssignment> {
        match self {
            Phases::PerState(theta) => {
                if theta.len() != joint.len() {
                    return Err(qlbn_core::Error::LengthMismatch {
                        expected: joint.len(),
                        actual: theta.len(),
                    });
                }
                PhaseAssignment::per_state(theta.clone())
            }
            Phases::PerOutcome { variable, angles } => PhaseAssignment::per_outcome(joint, variable, angles),
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub network: BeliefNetwork,
    /// Unconditioned joint distribution.
    pub joint: JointDistribution,
    pub rule: DecisionRule,
    /// One operator per action, in action order.
    pub operators: Vec<UtilityOperator>,
    pub phases: Option<Phases>,
    pub evidence: Assignment,
}

pub fn parse(text: &str, origin: &str) -> Result<ScenarioFile> {
    if text.trim().is_empty() {
        return Err(CliError::EmptyScenario {
            path: origin.to_string(),
        });
    }
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        CliError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    })
}

pub fn read(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, &path.display().to_string())
}

impl ScenarioFile {
    pub fn network(&self) -> BeliefNetwork {
        let variables = self
            .variables
            .iter()
            .map(|v| Variable::new(&v.name, &v.states))
            .collect();
        let tables = self
            .cpts
            .iter()
            .map(|c| {
                let rows = c
                    .rows
                    .iter()
                    .map(|r| TableRow::new(&r.given, r.probs.clone()))
                    .collect();
                ConditionalTable::new(&c.child, &c.parents, rows)
            })
            .collect();
        BeliefNetwork::new(variables, tables)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

impl Scenario {
    pub fn builtin() -> Self {
        let file = parse(PRISONERS_DILEMMA, "<built-in>").expect("bundled scenario parses");
        Scenario::from_file(&file).expect("bundled scenario is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_file(&read(path)?)
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let network = file.network();
        let report = network.validate();
        if !report.is_clean() {
            return Err(CliError::Invalid(format!("invalid network:\n{report}")));
        }
        let joint = network.enumerate_joint()?;
        let rule = DecisionRule::new(&joint, &file.decision)?;

        let mut by_action: BTreeMap<usize, &UtilitySpec> = BTreeMap::new();
        for spec in &file.utilities {
            let a = rule.action_index(&spec.action)?;
            if by_action.insert(a, spec).is_some() {
                return Err(qlbn_core::Error::DuplicateOperator(spec.action.clone()).into());
            }
        }
        let operators = rule
            .actions()
            .iter()
            .enumerate()
            .map(|(a, action)| match by_action.get(&a) {
                Some(spec) => utility_operator(&joint, &rule, spec),
                None => Ok(UtilityOperator::zero(&joint, &rule, action)?),
            })
            .collect::<Result<Vec<_>>>()?;

        let phases = file
            .phases
            .as_ref()
            .map(|p| resolve_phases(p, &joint, &file.decision))
            .transpose()?;

        let evidence: Assignment = file.evidence.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        joint.resolve(&evidence)?;

        Ok(Scenario {
            name: file.name.clone(),
            network,
            joint,
            rule,
            operators,
            phases,
            evidence,
        })
    }

    /// Serializable form of the model. Zero payoffs are left out.
    pub fn to_file(&self) -> ScenarioFile {
        let variables = self
            .network
            .variables()
            .iter()
            .map(|v| VariableSpec {
                name: v.name().to_string(),
                states: v.states().to_vec(),
            })
            .collect();
        let cpts = self
            .network
            .tables()
            .iter()
            .map(|t| CptSpec {
                child: t.child.clone(),
                parents: t.parents.clone(),
                rows: t
                    .rows
                    .iter()
                    .map(|r| RowSpec {
                        given: r.parent_states.clone(),
                        probs: r.probabilities.clone(),
                    })
                    .collect(),
            })
            .collect();
        let utilities = self
            .operators
            .iter()
            .map(|op| UtilitySpec {
                action: op.action().to_string(),
                entries: op
                    .diagonal()
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| **u != 0.0)
                    .map(|(i, &payoff)| PayoffSpec {
                        assignment: self
                            .joint
                            .basis_labels(i)
                            .into_iter()
                            .map(|(v, s)| (v.to_string(), s.to_string()))
                            .collect(),
                        payoff,
                    })
                    .collect(),
            })
            .collect();
        let phases = self.phases.as_ref().map(|p| match p {
            Phases::PerState(theta) => PhaseSpec::PerState { theta: theta.clone() },
            Phases::PerOutcome { variable, angles } => {
                let states = self.joint.variable(variable).expect("resolved at load").states();
                PhaseSpec::PerOutcome {
                    variable: Some(variable.clone()),
                    angles: states.iter().cloned().zip(angles.iter().copied()).collect(),
                }
            }
        });
        ScenarioFile {
            name: self.name.clone(),
            variables,
            cpts,
            decision: self.rule.variable().to_string(),
            utilities,
            phases,
            evidence: self
                .evidence
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("(unnamed)")
    }
}

fn utility_operator(joint: &JointDistribution, rule: &DecisionRule, spec: &UtilitySpec) -> Result<UtilityOperator> {
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(spec.entries.len());
    for entry in &spec.entries {
        let assignment: Assignment = entry.assignment.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let index = joint.index_of(&assignment)?;
        if !seen.insert(index) {
            return Err(CliError::Invalid(format!(
                "utilities for `{}` list the assignment {{{assignment}}} twice",
                spec.action
            )));
        }
        entries.push((assignment, entry.payoff));
    }
    Ok(UtilityOperator::from_entries(joint, rule, &spec.action, &entries)?)
}

fn resolve_phases(spec: &PhaseSpec, joint: &JointDistribution, decision: &str) -> Result<Phases> {
    match spec {
        PhaseSpec::PerState { theta } => {
            let phases = Phases::PerState(theta.clone());
            phases.assignment(joint)?;
            Ok(phases)
        }
        PhaseSpec::PerOutcome { variable, angles } => {
            let variable = variable.clone().unwrap_or_else(|| decision.to_string());
            let states = joint.variable(&variable)?.states();
            for name in angles.keys() {
                if !states.contains(name) {
                    return Err(qlbn_core::Error::UnknownState {
                        variable: variable.clone(),
                        state: name.clone(),
                    }
                    .into());
                }
            }
            let angles = states
                .iter()
                .map(|s| {
                    angles
                        .get(s)
                        .copied()
                        .ok_or_else(|| CliError::Invalid(format!("phases: no angle for `{variable}={s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let phases = Phases::PerOutcome { variable, angles };
            phases.assignment(joint)?;
            Ok(phases)
        }
    }
}
