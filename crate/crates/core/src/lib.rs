//! Quantum-like Bayesian inference.
//!
//! A discrete Bayesian network is enumerated into its classical joint
//! distribution, which is then lifted to a superposition state with one phase
//! per basis state. Marginals computed from the resulting density matrix carry
//! interference terms that vanish when the phases are orthogonal, so the model
//! contains the classical network as a special case.
//!
//! On top of that the crate evaluates utility operators (quantum-like
//! influence diagrams) and sweeps the phase plane to classify each point of
//! the decision-maker's belief space.
//!
//! ```
//! use qlbn_core::{pd, quantum_marginal_family, PhaseAssignment};
//!
//! let joint = pd::network().enumerate_joint().unwrap();
//! let half_pi = std::f64::consts::FRAC_PI_2;
//! let phases = PhaseAssignment::per_outcome(&joint, "P2", &[half_pi, half_pi]).unwrap();
//! let family = quantum_marginal_family(&joint, &phases, "P2").unwrap();
//! assert!((family.probability("Def").unwrap() - 0.905).abs() < 1e-9);
//! ```

pub mod decision;
pub mod error;
pub mod explorer;
pub mod network;
pub mod pd;
pub mod quantum;
pub mod roots;

pub use decision::{
    classical_expected_utility, meu_decision, quantum_expected_utility, DecisionRule, ExpectedUtilityResult,
    UtilityOperator,
};
pub use error::{Error, Result};
pub use explorer::{
    classify, grid_angles, probability_curve, sweep, BeliefGrid, BeliefPoint, CurvePoint, PointEvaluation, Region,
    RegionFractions, DEFAULT_EPSILON,
};
pub use network::{
    Assignment, BeliefNetwork, ConditionalTable, JointDistribution, TableRow, ValidationReport, Variable, Violation,
};
pub use quantum::{
    build_superposition, density, fit_phase, interference_term, quantum_marginal_family, selection_operator,
    DensityMatrix, MarginalFamily, PhaseAssignment, PhaseFit, QueryResult, SelectionOperator, SuperpositionState,
};
