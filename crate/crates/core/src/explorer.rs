//! Belief-space sweeps over the two per-outcome interference angles.
//!
//! Each point of the plane is classified against the classical decision (the
//! MEU action when interference vanishes):
//!
//! - `Irrational`: interference overturns the classical choice.
//! - `SubOptimal`: the classical choice survives but its lead over the
//!   runner-up is within `epsilon` of the top utility.
//! - `FullyClassical`: the classical choice survives with a wide margin.

use std::f64::consts::TAU;
use std::fmt;

use rayon::prelude::*;

use crate::decision::{
    argmax_with_margin, classical_expected_utility, meu_decision, order_operators, DecisionRule, UtilityOperator,
};
use crate::error::{Error, Result};
use crate::network::JointDistribution;
use crate::quantum::{quantum_marginal_family, PhaseAssignment};

/// Relative margin under which a surviving classical choice counts as a
/// near-tie.
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    FullyClassical,
    SubOptimal,
    Irrational,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::FullyClassical, Region::SubOptimal, Region::Irrational];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::FullyClassical => "FullyClassical",
            Region::SubOptimal => "SubOptimal",
            Region::Irrational => "Irrational",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(utilities: &[f64], default_action: usize, epsilon: f64) -> Result<Region> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if let Some(&bad) = utilities.iter().find(|u| !u.is_finite()) {
        return Err(Error::NonFiniteUtility(bad));
    }
    if default_action >= utilities.len() {
        return Err(Error::LengthMismatch {
            expected: default_action + 1,
            actual: utilities.len(),
        });
    }
    let (chosen, margin) = argmax_with_margin(utilities);
    if chosen != default_action {
        return Ok(Region::Irrational);
    }
    let scale = utilities[chosen].abs().max(f64::EPSILON);
    Ok(if utilities.len() > 1 && margin <= epsilon * scale {
        Region::SubOptimal
    } else {
        Region::FullyClassical
    })
}

/// `resolution` evenly spaced angles from 0 to 2π, both ends included.
pub fn grid_angles(resolution: usize) -> Vec<f64> {
    let step = TAU / (resolution - 1) as f64;
    (0..resolution)
        .map(|k| if k + 1 == resolution { TAU } else { k as f64 * step })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation {
    pub probabilities: Vec<f64>,
    pub utilities: Vec<f64>,
    pub chosen: usize,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefPoint {
    pub theta_a: f64,
    pub theta_b: f64,
    /// Failed points (e.g. fully destructive interference) keep their error.
    pub evaluation: std::result::Result<PointEvaluation, Error>,
}

impl BeliefPoint {
    pub fn region(&self) -> Option<Region> {
        self.evaluation.as_ref().ok().map(|e| e.region)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionFractions {
    pub fully_classical: f64,
    pub sub_optimal: f64,
    pub irrational: f64,
    pub failed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefGrid {
    pub resolution: usize,
    pub epsilon: f64,
    pub actions: Vec<String>,
    /// Classical MEU action at zero interference.
    pub default_action: usize,
    /// Row-major: `theta_a` is the row, `theta_b` the column.
    pub points: Vec<BeliefPoint>,
}

impl BeliefGrid {
    pub fn point(&self, row: usize, col: usize) -> &BeliefPoint {
        &self.points[row * self.resolution + col]
    }

    pub fn count(&self, region: Region) -> usize {
        self.points.iter().filter(|p| p.region() == Some(region)).count()
    }

    pub fn fractions(&self) -> RegionFractions {
        let n = self.points.len() as f64;
        let failed = self.points.iter().filter(|p| p.evaluation.is_err()).count();
        RegionFractions {
            fully_classical: self.count(Region::FullyClassical) as f64 / n,
            sub_optimal: self.count(Region::SubOptimal) as f64 / n,
            irrational: self.count(Region::Irrational) as f64 / n,
            failed: failed as f64 / n,
        }
    }
}

/// Evaluates marginals, expected utilities, choice and region on a
/// `resolution × resolution` grid over the two actions' per-outcome angles.
pub fn sweep(
    joint: &JointDistribution,
    operators: &[UtilityOperator],
    rule: &DecisionRule,
    resolution: usize,
    epsilon: f64,
) -> Result<BeliefGrid> {
    if resolution < 2 {
        return Err(Error::InvalidResolution(resolution));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if rule.actions().len() != 2 {
        return Err(Error::NotBinaryDecision {
            variable: rule.variable().to_string(),
            count: rule.actions().len(),
        });
    }
    let ordered = order_operators(operators, rule)?;
    let classical = ordered
        .iter()
        .map(|op| classical_expected_utility(joint, op))
        .collect::<Result<Vec<_>>>()?;
    let (default_action, _) = argmax_with_margin(&classical);

    let angles = grid_angles(resolution);
    let points = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (theta_a, theta_b) = (angles[k / resolution], angles[k % resolution]);
            let evaluation = PhaseAssignment::per_outcome(joint, rule.variable(), &[theta_a, theta_b])
                .and_then(|phases| meu_decision(joint, &phases, operators, rule))
                .and_then(|r| {
                    let region = classify(&r.utilities, default_action, epsilon)?;
                    Ok(PointEvaluation {
                        probabilities: r.probabilities,
                        utilities: r.utilities,
                        chosen: r.chosen,
                        region,
                    })
                });
            BeliefPoint {
                theta_a,
                theta_b,
                evaluation,
            }
        })
        .collect();

    Ok(BeliefGrid {
        resolution,
        epsilon,
        actions: rule.actions().to_vec(),
        default_action,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub theta: f64,
    /// One quantum marginal per state of the variable.
    pub probabilities: Vec<f64>,
}

/// Samples the marginal family of `variable` while the per-outcome angle of
/// state `axis` sweeps `[0, 2π]`; every other outcome's angle is held at
/// `fixed_other`.
pub fn probability_curve(
    joint: &JointDistribution,
    variable: &str,
    axis: usize,
    fixed_other: f64,
    resolution: usize,
) -> Result<Vec<CurvePoint>> {
    if resolution < 2 {
        return Err(Error::InvalidResolution(resolution));
    }
    let n_states = joint.variable(variable)?.states().len();
    if axis >= n_states {
        return Err(Error::LengthMismatch {
            expected: n_states,
            actual: axis + 1,
        });
    }
    grid_angles(resolution)
        .into_iter()
        .map(|theta| {
            let mut angles = vec![fixed_other; n_states];
            angles[axis] = theta;
            let phases = PhaseAssignment::per_outcome(joint, variable, &angles)?;
            let family = quantum_marginal_family(joint, &phases, variable)?;
            Ok(CurvePoint {
                theta,
                probabilities: family.probabilities(),
            })
        })
        .collect()
}
