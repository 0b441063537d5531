//! Discrete Bayesian networks and their classical joint distribution.
//!
//! The joint basis is ordered lexicographically by variable declaration order
//! with states in declared order, so the first declared variable is the most
//! significant digit. Every file format and operator in the crate indexes basis
//! states this way.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance on conditional-table row sums and on joint totals.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Upper bound on the number of joint basis states (20 binary variables).
pub const MAX_BASIS_STATES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// One row of a conditional table: the distribution of the child given one
/// combination of parent states (listed in the table's parent order).
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub parent_states: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl TableRow {
    pub fn new<S: Into<String>>(parent_states: impl IntoIterator<Item = S>, probabilities: Vec<f64>) -> Self {
        Self {
            parent_states: parent_states.into_iter().map(Into::into).collect(),
            probabilities,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl ConditionalTable {
    pub fn new<S: Into<String>>(
        child: impl Into<String>,
        parents: impl IntoIterator<Item = S>,
        rows: Vec<TableRow>,
    ) -> Self {
        Self {
            child: child.into(),
            parents: parents.into_iter().map(Into::into).collect(),
            rows,
        }
    }

    /// Table for a root variable.
    pub fn prior(child: impl Into<String>, probabilities: Vec<f64>) -> Self {
        Self {
            child: child.into(),
            parents: Vec::new(),
            rows: vec![TableRow {
                parent_states: Vec::new(),
                probabilities,
            }],
        }
    }
}

/// A broken network rule. Each variant names the variable or table at fault.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    TooFewStates {
        variable: String,
        count: usize,
    },
    DuplicateState {
        variable: String,
        state: String,
    },
    DuplicateVariable(String),
    MissingTable(String),
    DuplicateTable(String),
    UnknownChild(String),
    UnknownParent {
        table: String,
        parent: String,
    },
    DuplicateParent {
        table: String,
        parent: String,
    },
    RowArity {
        table: String,
        row: Vec<String>,
        expected: usize,
        actual: usize,
    },
    UnknownParentState {
        table: String,
        row: Vec<String>,
        state: String,
    },
    DuplicateRow {
        table: String,
        row: Vec<String>,
    },
    MissingRow {
        table: String,
        row: Vec<String>,
    },
    ProbabilityCount {
        table: String,
        row: Vec<String>,
        expected: usize,
        actual: usize,
    },
    ProbabilityOutOfRange {
        table: String,
        row: Vec<String>,
        value: f64,
    },
    RowSum {
        table: String,
        row: Vec<String>,
        sum: f64,
    },
    Cycle(Vec<String>),
    TooLarge {
        states: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            Empty => write!(f, "network declares no variables"),
            TooFewStates { variable, count } => {
                write!(f, "variable `{variable}` has {count} state(s), at least 2 required")
            }
            DuplicateState { variable, state } => {
                write!(f, "variable `{variable}` declares state `{state}` twice")
            }
            DuplicateVariable(name) => write!(f, "variable `{name}` declared twice"),
            MissingTable(name) => write!(f, "variable `{name}` has no conditional table"),
            DuplicateTable(name) => write!(f, "variable `{name}` has more than one conditional table"),
            UnknownChild(name) => write!(f, "table for undeclared variable `{name}`"),
            UnknownParent { table, parent } => {
                write!(f, "table `{table}`: parent `{parent}` is not a declared variable")
            }
            DuplicateParent { table, parent } => {
                write!(f, "table `{table}`: parent `{parent}` listed twice")
            }
            RowArity {
                table,
                row,
                expected,
                actual,
            } => write!(
                f,
                "table `{table}`, row [{}]: {actual} parent state(s) given, {expected} expected",
                row.join(", ")
            ),
            UnknownParentState { table, row, state } => write!(
                f,
                "table `{table}`, row [{}]: unknown parent state `{state}`",
                row.join(", ")
            ),
            DuplicateRow { table, row } => {
                write!(f, "table `{table}`, row [{}]: given more than once", row.join(", "))
            }
            MissingRow { table, row } => {
                write!(f, "table `{table}`, row [{}]: missing", row.join(", "))
            }
            ProbabilityCount {
                table,
                row,
                expected,
                actual,
            } => write!(
                f,
                "table `{table}`, row [{}]: {actual} probabilities given, {expected} expected",
                row.join(", ")
            ),
            ProbabilityOutOfRange { table, row, value } => write!(
                f,
                "table `{table}`, row [{}]: probability {value} outside [0, 1]",
                row.join(", ")
            ),
            RowSum { table, row, sum } => write!(
                f,
                "table `{table}`, row [{}]: probabilities sum to {sum}, must be 1 within {PROBABILITY_TOLERANCE:e}",
                row.join(", ")
            ),
            Cycle(names) => write!(f, "parent edges form a cycle through {}", names.join(", ")),
            TooLarge { states } => write!(
                f,
                "joint has {states} basis states, more than the limit of {MAX_BASIS_STATES}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefNetwork {
    variables: Vec<Variable>,
    tables: Vec<ConditionalTable>,
}

impl BeliefNetwork {
    /// Builds a network without checking it; see [`BeliefNetwork::validate`].
    pub fn new(variables: Vec<Variable>, tables: Vec<ConditionalTable>) -> Self {
        Self { variables, tables }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn tables(&self) -> &[ConditionalTable] {
        &self.tables
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        if self.variables.is_empty() {
            out.push(Violation::Empty);
        }

        let mut names = HashSet::new();
        for var in &self.variables {
            if !names.insert(var.name.as_str()) {
                out.push(Violation::DuplicateVariable(var.name.clone()));
            }
            if var.states.len() < 2 {
                out.push(Violation::TooFewStates {
                    variable: var.name.clone(),
                    count: var.states.len(),
                });
            }
            let mut seen = HashSet::new();
            for s in &var.states {
                if !seen.insert(s.as_str()) {
                    out.push(Violation::DuplicateState {
                        variable: var.name.clone(),
                        state: s.clone(),
                    });
                }
            }
        }

        let mut table_count: HashMap<&str, usize> = HashMap::new();
        for table in &self.tables {
            *table_count.entry(table.child.as_str()).or_default() += 1;
        }
        for var in &self.variables {
            match table_count.get(var.name.as_str()) {
                None => out.push(Violation::MissingTable(var.name.clone())),
                Some(&n) if n > 1 => out.push(Violation::DuplicateTable(var.name.clone())),
                _ => {}
            }
        }

        for table in &self.tables {
            let Some(child) = self.variable(&table.child) else {
                out.push(Violation::UnknownChild(table.child.clone()));
                continue;
            };
            self.validate_table(table, child, &mut out);
        }

        if let Some(cycle) = self.find_cycle() {
            out.push(Violation::Cycle(cycle));
        }

        let states = self
            .variables
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.states.len().max(1)));
        match states {
            Some(n) if n <= MAX_BASIS_STATES => {}
            other => out.push(Violation::TooLarge {
                states: other.unwrap_or(usize::MAX),
            }),
        }

        ValidationReport { violations: out }
    }

    fn validate_table(&self, table: &ConditionalTable, child: &Variable, out: &mut Vec<Violation>) {
        let name = &table.child;
        let mut parents = Vec::with_capacity(table.parents.len());
        let mut seen = HashSet::new();
        let mut parents_ok = true;
        for p in &table.parents {
            if !seen.insert(p.as_str()) {
                out.push(Violation::DuplicateParent {
                    table: name.clone(),
                    parent: p.clone(),
                });
                parents_ok = false;
            }
            match self.variable(p) {
                Some(v) => parents.push(v),
                None => {
                    out.push(Violation::UnknownParent {
                        table: name.clone(),
                        parent: p.clone(),
                    });
                    parents_ok = false;
                }
            }
        }

        let mut covered = HashSet::new();
        for row in &table.rows {
            let key = &row.parent_states;
            let mut row_ok = parents_ok;
            if key.len() != table.parents.len() {
                out.push(Violation::RowArity {
                    table: name.clone(),
                    row: key.clone(),
                    expected: table.parents.len(),
                    actual: key.len(),
                });
                row_ok = false;
            } else if parents_ok {
                for (state, parent) in key.iter().zip(&parents) {
                    if parent.state_index(state).is_none() {
                        out.push(Violation::UnknownParentState {
                            table: name.clone(),
                            row: key.clone(),
                            state: state.clone(),
                        });
                        row_ok = false;
                    }
                }
            }
            if row_ok && !covered.insert(key.clone()) {
                out.push(Violation::DuplicateRow {
                    table: name.clone(),
                    row: key.clone(),
                });
            }

            if row.probabilities.len() != child.states.len() {
                out.push(Violation::ProbabilityCount {
                    table: name.clone(),
                    row: key.clone(),
                    expected: child.states.len(),
                    actual: row.probabilities.len(),
                });
            }
            let mut in_range = true;
            for &p in &row.probabilities {
                if !(0.0..=1.0).contains(&p) {
                    out.push(Violation::ProbabilityOutOfRange {
                        table: name.clone(),
                        row: key.clone(),
                        value: p,
                    });
                    in_range = false;
                }
            }
            let sum: f64 = row.probabilities.iter().sum();
            if in_range && (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                out.push(Violation::RowSum {
                    table: name.clone(),
                    row: key.clone(),
                    sum,
                });
            }
        }

        if parents_ok {
            for combo in state_combinations(&parents) {
                if !covered.contains(&combo) {
                    out.push(Violation::MissingRow {
                        table: name.clone(),
                        row: combo,
                    });
                }
            }
        }
    }

    /// Returns the variables on some directed cycle, if there is one.
    fn find_cycle(&self) -> Option<Vec<String>> {
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let n = self.variables.len();
        let mut children = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for table in &self.tables {
            let Some(&c) = index.get(table.child.as_str()) else {
                continue;
            };
            let mut seen = HashSet::new();
            for p in &table.parents {
                if let Some(&pi) = index.get(p.as_str()) {
                    if seen.insert(pi) {
                        children[pi].push(c);
                        indegree[c] += 1;
                    }
                }
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut removed = 0;
        while let Some(i) = queue.pop() {
            removed += 1;
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        (removed < n).then(|| {
            (0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.variables[i].name.clone())
                .collect()
        })
    }

    /// Enumerates the classical joint distribution by multiplying the matching
    /// conditional-table entries for every complete assignment.
    pub fn enumerate_joint(&self) -> Result<JointDistribution> {
        let report = self.validate();
        if !report.is_clean() {
            return Err(Error::InvalidNetwork(report));
        }

        struct Lookup<'a> {
            child: usize,
            parents: Vec<usize>,
            rows: HashMap<Vec<usize>, &'a [f64]>,
        }

        let position = |name: &str| self.variables.iter().position(|v| v.name == name).unwrap();
        let lookups: Vec<Lookup> = self
            .tables
            .iter()
            .map(|t| {
                let parents: Vec<usize> = t.parents.iter().map(|p| position(p)).collect();
                let rows = t
                    .rows
                    .iter()
                    .map(|r| {
                        let key = r
                            .parent_states
                            .iter()
                            .zip(&parents)
                            .map(|(s, &p)| self.variables[p].state_index(s).unwrap())
                            .collect();
                        (key, r.probabilities.as_slice())
                    })
                    .collect();
                Lookup {
                    child: position(&t.child),
                    parents,
                    rows,
                }
            })
            .collect();

        let basis = basis_states(&self.variables);
        let mut key = Vec::new();
        let probabilities = basis
            .iter()
            .map(|states| {
                lookups
                    .iter()
                    .map(|l| {
                        key.clear();
                        key.extend(l.parents.iter().map(|&p| states[p]));
                        l.rows[&key][states[l.child]]
                    })
                    .product()
            })
            .collect();

        Ok(JointDistribution {
            variables: self.variables.clone(),
            basis,
            probabilities,
        })
    }
}

/// All complete assignments in lexicographic order, as state indices.
fn basis_states(variables: &[Variable]) -> Vec<Vec<usize>> {
    let total: usize = variables.iter().map(|v| v.states.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; variables.len()];
    for _ in 0..total {
        out.push(current.clone());
        for k in (0..variables.len()).rev() {
            current[k] += 1;
            if current[k] < variables[k].states.len() {
                break;
            }
            current[k] = 0;
        }
    }
    out
}

fn state_combinations(variables: &[&Variable]) -> Vec<Vec<String>> {
    let owned: Vec<Variable> = variables.iter().map(|v| (*v).clone()).collect();
    basis_states(&owned)
        .into_iter()
        .map(|idx| idx.iter().zip(variables).map(|(&i, v)| v.states[i].clone()).collect())
        .collect()
}

/// A partial assignment of states to variables, used for queries and evidence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.0.insert(variable.into(), state.into());
        self
    }

    pub fn insert(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl<K: Into<String>, V: Into<String>, const N: usize> From<[(K, V); N]> for Assignment {
    fn from(pairs: [(K, V); N]) -> Self {
        pairs.into_iter().collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Classical joint distribution over every complete assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    variables: Vec<Variable>,
    basis: Vec<Vec<usize>>,
    probabilities: Vec<f64>,
}

impl JointDistribution {
    /// Builds a joint directly from probabilities in basis order.
    pub fn from_probabilities(variables: Vec<Variable>, probabilities: Vec<f64>) -> Result<Self> {
        let basis = basis_states(&variables);
        if basis.len() != probabilities.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                actual: probabilities.len(),
            });
        }
        let total: f64 = probabilities.iter().sum();
        let bad = probabilities.iter().any(|p| !p.is_finite() || *p < 0.0);
        if bad || (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidNetwork(ValidationReport {
                violations: vec![Violation::RowSum {
                    table: "joint".into(),
                    row: Vec::new(),
                    sum: total,
                }],
            }));
        }
        Ok(Self {
            variables,
            basis,
            probabilities,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// State indices of basis state `i`, one per variable.
    pub fn basis_state(&self, i: usize) -> &[usize] {
        &self.basis[i]
    }

    pub fn basis_labels(&self, i: usize) -> Vec<(&str, &str)> {
        self.basis[i]
            .iter()
            .zip(&self.variables)
            .map(|(&s, v)| (v.name.as_str(), v.states[s].as_str()))
            .collect()
    }

    /// Resolves a partial assignment into (variable index, state index) pairs.
    pub fn resolve(&self, query: &Assignment) -> Result<Vec<(usize, usize)>> {
        query
            .iter()
            .map(|(var, state)| {
                let vi = self.variable_index(var)?;
                let si = self.variables[vi]
                    .state_index(state)
                    .ok_or_else(|| Error::UnknownState {
                        variable: var.to_string(),
                        state: state.to_string(),
                    })?;
                Ok((vi, si))
            })
            .collect()
    }

    /// `mask[i]` is true iff basis state `i` agrees with every pair in `query`.
    pub fn consistent_mask(&self, query: &Assignment) -> Result<Vec<bool>> {
        let resolved = self.resolve(query)?;
        Ok(self
            .basis
            .iter()
            .map(|states| resolved.iter().all(|&(v, s)| states[v] == s))
            .collect())
    }

    /// Basis index of a complete assignment.
    pub fn index_of(&self, assignment: &Assignment) -> Result<usize> {
        if let Some(missing) = self.variables.iter().find(|v| assignment.get(&v.name).is_none()) {
            return Err(Error::IncompleteAssignment(missing.name.clone()));
        }
        let resolved = self.resolve(assignment)?;
        let mut index = 0;
        for (vi, var) in self.variables.iter().enumerate() {
            let si = resolved.iter().find(|&&(v, _)| v == vi).unwrap().1;
            index = index * var.states.len() + si;
        }
        Ok(index)
    }

    /// Zeroes every basis state inconsistent with `evidence` and renormalizes.
    /// The basis itself is unchanged.
    pub fn condition(&self, evidence: &Assignment) -> Result<JointDistribution> {
        let mask = self.consistent_mask(evidence)?;
        let total: f64 = self
            .probabilities
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(p, _)| p)
            .sum();
        if total <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        let probabilities = self
            .probabilities
            .iter()
            .zip(&mask)
            .map(|(&p, &m)| if m { p / total } else { 0.0 })
            .collect();
        Ok(JointDistribution {
            variables: self.variables.clone(),
            basis: self.basis.clone(),
            probabilities,
        })
    }

    pub fn classical_marginal(&self, query: &Assignment) -> Result<f64> {
        let mask = self.consistent_mask(query)?;
        Ok(self
            .probabilities
            .iter()
            .zip(mask)
            .filter(|(_, m)| *m)
            .map(|(p, _)| p)
            .sum())
    }
}
