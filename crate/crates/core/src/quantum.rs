//! Lifting a joint distribution to a superposition state and computing
//! interference-modulated marginals.
//!
//! Basis state `i` with classical probability `p_i` and phase `θ_i` gets the
//! amplitude `√p_i · e^{iθ_i}`. The density matrix is the outer product of
//! that vector with its conjugate, and the unnormalized weight of a query
//! outcome is the selection-masked sum over the matrix:
//!
//! ```text
//! Σ_{i,j ∈ s} ρ_ij = Σ_{i∈s} p_i + 2 Σ_{i<j ∈ s} √(p_i p_j) cos(θ_i − θ_j)
//! ```
//!
//! The outcomes of one variable are then normalized by a shared factor γ.
//! Only phase differences enter, and when every difference within an outcome
//! is an odd multiple of π/2 the cross terms vanish and the classical
//! marginal comes back.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{Assignment, JointDistribution};
use crate::roots;

/// Below this total weight a marginal family is treated as fully destructive.
const DEGENERACY_FLOOR: f64 = 1e-14;

/// Tolerance on the fitted probability.
pub const FIT_TOLERANCE: f64 = 1e-9;

/// One phase per joint basis state, reduced into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAssignment {
    theta: Vec<f64>,
}

impl PhaseAssignment {
    pub fn per_state(theta: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = theta.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFinitePhase(bad));
        }
        Ok(Self {
            theta: theta.into_iter().map(reduce_angle).collect(),
        })
    }

    /// Expands one angle per state of `variable` into per-basis-state phases.
    ///
    /// For each outcome the first consistent basis state (in basis order) gets
    /// the outcome's angle and the remaining consistent states get 0. With two
    /// consistent states per outcome the angle is exactly their phase
    /// difference.
    pub fn per_outcome(joint: &JointDistribution, variable: &str, angles: &[f64]) -> Result<Self> {
        let vi = joint.variable_index(variable)?;
        let n_states = joint.variables()[vi].states().len();
        if angles.len() != n_states {
            return Err(Error::LengthMismatch {
                expected: n_states,
                actual: angles.len(),
            });
        }
        let mut theta = vec![0.0; joint.len()];
        let mut seen = vec![false; n_states];
        for (i, t) in theta.iter_mut().enumerate() {
            let s = joint.basis_state(i)[vi];
            if !seen[s] {
                seen[s] = true;
                *t = angles[s];
            }
        }
        Self::per_state(theta)
    }

    /// Every outcome of `variable` shares the same angle.
    pub fn shared(joint: &JointDistribution, variable: &str, angle: f64) -> Result<Self> {
        let n = joint.variable(variable)?.states().len();
        Self::per_outcome(joint, variable, &vec![angle; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionState {
    amplitudes: Vec<Complex64>,
}

impl SuperpositionState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|Σ_{i ∈ mask} a_i|²`, the weight of an outcome computed directly from
    /// the amplitudes.
    pub fn masked_weight(&self, mask: &[bool]) -> f64 {
        self.amplitudes
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(a, _)| *a)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

pub fn build_superposition(joint: &JointDistribution, phases: &PhaseAssignment) -> Result<SuperpositionState> {
    if phases.len() != joint.len() {
        return Err(Error::LengthMismatch {
            expected: joint.len(),
            actual: phases.len(),
        });
    }
    let amplitudes = joint
        .probabilities()
        .iter()
        .zip(phases.as_slice())
        .map(|(&p, &theta)| Complex64::from_polar(p.sqrt(), theta))
        .collect();
    Ok(SuperpositionState { amplitudes })
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn matmul(&self, other: &DensityMatrix) -> DensityMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        DensityMatrix { dim: n, entries }
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise `|(ρρ − ρ)_ij|`.
    pub fn idempotency_defect(&self) -> f64 {
        let sq = self.matmul(self);
        sq.entries
            .iter()
            .zip(&self.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_{i,j} m_i m_j ρ_ij` for a 0/1 mask.
    pub fn masked_sum(&self, mask: &[bool]) -> Complex64 {
        let idx: Vec<usize> = (0..self.dim).filter(|&i| mask[i]).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for &i in &idx {
            for &j in &idx {
                total += self.get(i, j);
            }
        }
        total
    }
}

/// `ρ = S S†`.
pub fn density(state: &SuperpositionState) -> DensityMatrix {
    let a = &state.amplitudes;
    let n = a.len();
    let mut entries = Vec::with_capacity(n * n);
    for ai in a {
        for aj in a {
            entries.push(ai * aj.conj());
        }
    }
    DensityMatrix { dim: n, entries }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOperator {
    mask: Vec<bool>,
    query: Assignment,
}

impl SelectionOperator {
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn query(&self) -> &Assignment {
        &self.query
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect()
    }
}

pub fn selection_operator(joint: &JointDistribution, query: &Assignment) -> Result<SelectionOperator> {
    Ok(SelectionOperator {
        mask: joint.consistent_mask(query)?,
        query: query.clone(),
    })
}

/// `Σ_{i<j}` over query-consistent basis states of `√(p_i p_j) cos(θ_i − θ_j)`.
///
/// The outcome weight is the classical marginal plus twice this value.
pub fn interference_term(joint: &JointDistribution, query: &Assignment, phases: &PhaseAssignment) -> Result<f64> {
    if phases.len() != joint.len() {
        return Err(Error::LengthMismatch {
            expected: joint.len(),
            actual: phases.len(),
        });
    }
    let mask = joint.consistent_mask(query)?;
    Ok(pairwise_interference(joint.probabilities(), phases.as_slice(), &mask))
}

fn pairwise_interference(p: &[f64], theta: &[f64], mask: &[bool]) -> f64 {
    let idx: Vec<usize> = (0..p.len()).filter(|&i| mask[i]).collect();
    let mut total = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            total += (p[i] * p[j]).sqrt() * (theta[i] - theta[j]).cos();
        }
    }
    total
}

/// Marginal of one outcome, with its classical/interference decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub state: String,
    /// Classical marginal `Σ_{i∈s} p_i`.
    pub classical_part: f64,
    /// Pairwise cross term; the outcome weight adds it twice.
    pub interference_part: f64,
    /// `|Σ_{i,j∈s} ρ_ij|` from the density matrix.
    pub unnormalized: f64,
    /// `|Σ_{i∈s} a_i|²` from the amplitudes; equals `unnormalized` up to rounding.
    pub amplitude_path: f64,
    pub gamma: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalFamily {
    pub variable: String,
    pub gamma: f64,
    pub results: Vec<QueryResult>,
}

impl MarginalFamily {
    pub fn get(&self, state: &str) -> Option<&QueryResult> {
        self.results.iter().find(|r| r.state == state)
    }

    pub fn probability(&self, state: &str) -> Option<f64> {
        self.get(state).map(|r| r.probability)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.probability).collect()
    }
}

/// Quantum-like marginal of every state of `variable`, normalized by
/// `γ = 1 / Σ_s |Σ_{i,j∈s} ρ_ij|`.
pub fn quantum_marginal_family(
    joint: &JointDistribution,
    phases: &PhaseAssignment,
    variable: &str,
) -> Result<MarginalFamily> {
    let vi = joint.variable_index(variable)?;
    let state = build_superposition(joint, phases)?;
    let rho = density(&state);
    let var = &joint.variables()[vi];
    let p = joint.probabilities();

    let mut results: Vec<QueryResult> = var
        .states()
        .iter()
        .enumerate()
        .map(|(s, label)| {
            let mask: Vec<bool> = (0..joint.len()).map(|i| joint.basis_state(i)[vi] == s).collect();
            let classical_part = p.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x).sum();
            QueryResult {
                state: label.clone(),
                classical_part,
                interference_part: pairwise_interference(p, phases.as_slice(), &mask),
                unnormalized: rho.masked_sum(&mask).norm(),
                amplitude_path: state.masked_weight(&mask),
                gamma: 0.0,
                probability: 0.0,
            }
        })
        .collect();

    let total: f64 = results.iter().map(|r| r.unnormalized).sum();
    if total < DEGENERACY_FLOOR {
        return Err(Error::DegenerateInterference(variable.to_string()));
    }
    let gamma = 1.0 / total;
    for r in &mut results {
        r.gamma = gamma;
        r.probability = gamma * r.unnormalized;
    }
    Ok(MarginalFamily {
        variable: variable.to_string(),
        gamma,
        results,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFit {
    /// Shared per-outcome angle in `[0, π]`.
    pub theta: f64,
    pub achieved: f64,
    /// Attainable range of the target probability over all shared angles.
    pub envelope: (f64, f64),
}

/// Finds the shared per-outcome angle θ (every outcome of `variable` gets θ)
/// at which the quantum marginal of `target_state` equals
/// `target_probability`.
///
/// Each outcome weight is linear in `cos θ`, so the marginal is a Möbius
/// function of `cos θ` and monotone on `[-1, 1]`. The root is bracketed on
/// that interval and the result is mapped back through `arccos`, giving
/// θ in `[0, π]`.
pub fn fit_phase(
    joint: &JointDistribution,
    variable: &str,
    target_state: &str,
    target_probability: f64,
) -> Result<PhaseFit> {
    if !(target_probability > 0.0 && target_probability < 1.0) {
        return Err(Error::InvalidTarget(target_probability));
    }
    joint.resolve(&Assignment::from([(variable, target_state)]))?;

    let marginal = |c: f64| -> Result<f64> {
        let phases = PhaseAssignment::shared(joint, variable, c.clamp(-1.0, 1.0).acos())?;
        let family = quantum_marginal_family(joint, &phases, variable)?;
        Ok(family.probability(target_state).unwrap())
    };

    let at_zero = marginal(1.0)?;
    let at_pi = marginal(-1.0)?;
    let envelope = (at_zero.min(at_pi), at_zero.max(at_pi));
    let unreachable = || Error::UnreachableTarget {
        target: target_probability,
        min: envelope.0,
        max: envelope.1,
    };

    let done = |c: f64, achieved: f64| PhaseFit {
        theta: c.clamp(-1.0, 1.0).acos(),
        achieved,
        envelope,
    };
    if (at_zero - target_probability).abs() <= FIT_TOLERANCE {
        return Ok(done(1.0, at_zero));
    }
    if (at_pi - target_probability).abs() <= FIT_TOLERANCE {
        return Ok(done(-1.0, at_pi));
    }
    if target_probability < envelope.0 || target_probability > envelope.1 {
        return Err(unreachable());
    }

    let mut failure = None;
    let c = roots::brent(
        |c| match marginal(c) {
            Ok(v) => v - target_probability,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        -1.0,
        1.0,
        1e-15,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let achieved = marginal(c)?;
    if (achieved - target_probability).abs() > FIT_TOLERANCE {
        return Err(Error::NoConvergence(0));
    }
    Ok(done(c, achieved))
}
