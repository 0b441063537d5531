//! Acceptance criteria. Each prints one PASS/FAIL line with its runtime; the
//! process exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qlbn_cli::Scenario;
use qlbn_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug)]
struct Failure(String);

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure(s)
    }
}

impl From<qlbn_core::Error> for Failure {
    fn from(e: qlbn_core::Error) -> Self {
        Failure(e.to_string())
    }
}

type Check = std::result::Result<(), Failure>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(Failure(format!($($msg)+)));
        }
    };
}

const RANDOM_NETWORKS: usize = 256;
const PINNED_IRRATIONAL: usize = 14087;

fn pd() -> (Scenario, DecisionRule) {
    let s = Scenario::builtin();
    let rule = s.rule.clone();
    (s, rule)
}

fn family(joint: &JointDistribution, angles: [f64; 2]) -> MarginalFamily {
    let phases = PhaseAssignment::per_outcome(joint, "P2", &angles).unwrap();
    quantum_marginal_family(joint, &phases, "P2").unwrap()
}

fn certainty_conditions() -> Check {
    let (s, _) = pd();
    let def = Assignment::new().with("P2", "Def");
    for (opponent, expected) in [("Def", 0.97), ("Coop", 0.84)] {
        let cond = s.joint.condition(&Assignment::new().with("P1", opponent))?;
        let p = cond.classical_marginal(&def)?;
        ensure!((p - expected).abs() <= 1e-12, "P1={opponent}: {p} vs {expected}");
    }
    Ok(())
}

fn classical_baseline() -> Check {
    let (s, _) = pd();
    let p = family(&s.joint, [FRAC_PI_2; 2]).probability("Def").unwrap();
    ensure!((p - 0.905).abs() <= 1e-9, "Pr_q(Def) at pi/2 = {p}");
    Ok(())
}

fn disjunction_effect() -> Check {
    let (s, _) = pd();
    let p = family(&s.joint, [pd::REPORTED_THETA; 2]).probability("Def").unwrap();
    ensure!((p - 0.63).abs() <= 0.02, "Pr_q(Def) at 2.8057 = {p}");
    let fit = fit_phase(&s.joint, "P2", "Def", 0.63)?;
    ensure!((2.8148..=2.8168).contains(&fit.theta), "fitted theta {}", fit.theta);
    let again = family(&s.joint, [fit.theta; 2]).probability("Def").unwrap();
    ensure!((again - 0.63).abs() <= 1e-6, "re-evaluated {again}");
    Ok(())
}

fn interference_coefficients() -> Check {
    let (s, _) = pd();
    let phases = PhaseAssignment::per_state(vec![0.3, 1.1, 2.0, 5.0])?;
    let rho = density(&build_superposition(&s.joint, &phases)?);
    // basis (P1, P2): Def pair is states 0 and 2, Coop pair 1 and 3
    let def = rho.get(0, 2).norm();
    let coop = rho.get(1, 3).norm();
    ensure!((def - 0.451331).abs() <= 1e-6, "Def pair {def}");
    ensure!((coop - 0.034641).abs() <= 1e-6, "Coop pair {coop}");
    Ok(())
}

fn cooperate_dominance() -> Check {
    let (s, rule) = pd();
    for k in 0..360 {
        let coop = TAU * k as f64 / 360.0;
        let phases = PhaseAssignment::per_outcome(&s.joint, "P2", &[PI, coop])?;
        let r = meu_decision(&s.joint, &phases, &s.operators, &rule)?;
        ensure!(
            r.utilities[1] > r.utilities[0],
            "theta_Coop = {k} deg: EU = {:?}",
            r.utilities
        );
    }
    Ok(())
}

struct RandomCase {
    joint: JointDistribution,
    decision: String,
}

fn random_case(rng: &mut StdRng) -> RandomCase {
    let n = rng.gen_range(1..=4);
    let name = |i: usize| format!("V{i}");
    let variables = (0..n).map(|i| Variable::new(name(i), ["t", "f"])).collect();
    let tables = (0..n)
        .map(|i| {
            let parents: Vec<usize> = (0..i).filter(|_| rng.gen_bool(0.5)).collect();
            let rows = (0..1usize << parents.len())
                .map(|r| {
                    let given: Vec<&str> = (0..parents.len())
                        .map(|b| {
                            if r >> (parents.len() - 1 - b) & 1 == 1 {
                                "f"
                            } else {
                                "t"
                            }
                        })
                        .collect();
                    // exact zeros now and then
                    let p = match rng.gen_range(0..10) {
                        0 => 0.0,
                        1 => 1.0,
                        _ => rng.gen::<f64>(),
                    };
                    TableRow::new(given, vec![p, 1.0 - p])
                })
                .collect();
            ConditionalTable::new(name(i), parents.iter().map(|&p| name(p)), rows)
        })
        .collect();
    let joint = BeliefNetwork::new(variables, tables).enumerate_joint().unwrap();
    RandomCase {
        decision: name(rng.gen_range(0..n)),
        joint,
    }
}

fn random_phases(rng: &mut StdRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(0.0..TAU)).collect()
}

/// Phases giving zero interference on every outcome of `variable`: each
/// amplitude is perpendicular to the running sum of the ones before it.
fn orthogonal_phases(rng: &mut StdRng, joint: &JointDistribution, variable: &str) -> Vec<f64> {
    let vi = joint.variable_index(variable).unwrap();
    let p = joint.probabilities();
    let mut theta = vec![0.0; joint.len()];
    for s in 0..joint.variables()[vi].states().len() {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for i in (0..joint.len()).filter(|&i| joint.basis_state(i)[vi] == s) {
            theta[i] = if re == 0.0 && im == 0.0 {
                rng.gen_range(0.0..TAU)
            } else {
                im.atan2(re) + if rng.gen_bool(0.5) { FRAC_PI_2 } else { -FRAC_PI_2 }
            };
            re += p[i].sqrt() * theta[i].cos();
            im += p[i].sqrt() * theta[i].sin();
        }
    }
    theta
}

fn random_operators(rng: &mut StdRng, case: &RandomCase, rule: &DecisionRule) -> Vec<UtilityOperator> {
    let vi = case.joint.variable_index(&case.decision).unwrap();
    rule.actions()
        .iter()
        .enumerate()
        .map(|(a, action)| {
            let diag = (0..case.joint.len())
                .map(|i| {
                    if case.joint.basis_state(i)[vi] == a {
                        rng.gen_range(-50.0..100.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            UtilityOperator::new(&case.joint, rule, action, diag).unwrap()
        })
        .collect()
}

fn property_suite() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut evaluated = [0usize; 6];
    for case_no in 0..RANDOM_NETWORKS {
        let case = random_case(&mut rng);
        let joint = &case.joint;
        let rule = DecisionRule::new(joint, &case.decision)?;
        let theta = random_phases(&mut rng, joint.len());
        let phases = PhaseAssignment::per_state(theta.clone())?;
        let ctx = |what: &str| format!("network {case_no} ({} states): {what}", joint.len());

        // (a)
        let rho = density(&build_superposition(joint, &phases)?);
        ensure!(rho.hermitian_defect() <= 1e-9, "{}", ctx("not Hermitian"));
        ensure!(
            (rho.trace().re - 1.0).abs() <= 1e-9 && rho.trace().im.abs() <= 1e-9,
            "{}",
            ctx("trace")
        );
        ensure!(rho.idempotency_defect() <= 1e-9, "{}", ctx("not idempotent"));
        evaluated[0] += 1;

        let fam = match quantum_marginal_family(joint, &phases, &case.decision) {
            Ok(f) => Some(f),
            Err(Error::DegenerateInterference(_)) => None,
            Err(e) => return Err(ctx(&e.to_string()).into()),
        };
        if let Some(fam) = &fam {
            // (b)
            let total: f64 = fam.probabilities().iter().sum();
            ensure!(
                (total - 1.0).abs() <= 1e-9,
                "{}",
                ctx(&format!("family sums to {total}"))
            );
            evaluated[1] += 1;
            // (c)
            for r in &fam.results {
                ensure!(
                    (r.unnormalized - r.amplitude_path).abs() <= 1e-12,
                    "{}",
                    ctx(&format!("paths differ: {} vs {}", r.unnormalized, r.amplitude_path))
                );
            }
            evaluated[2] += 1;
            // (d)
            let shift = rng.gen_range(-10.0..10.0);
            let shifted = PhaseAssignment::per_state(theta.iter().map(|t| t + shift).collect())?;
            let other = quantum_marginal_family(joint, &shifted, &case.decision)?;
            for (x, y) in fam.results.iter().zip(&other.results) {
                ensure!(
                    (x.probability - y.probability).abs() <= 1e-12,
                    "{}",
                    ctx(&format!(
                        "gauge shift {shift} moved {} to {}",
                        x.probability, y.probability
                    ))
                );
            }
            evaluated[3] += 1;
        }

        // (e)
        let flat = PhaseAssignment::per_state(orthogonal_phases(&mut rng, joint, &case.decision))?;
        let fam = quantum_marginal_family(joint, &flat, &case.decision)?;
        for r in &fam.results {
            let classical =
                joint.classical_marginal(&Assignment::new().with(case.decision.as_str(), r.state.as_str()))?;
            ensure!(
                (r.probability - classical).abs() <= 1e-9,
                "{}",
                ctx("marginal not classical")
            );
        }
        let ops = random_operators(&mut rng, &case, &rule);
        for op in &ops {
            match quantum_expected_utility(joint, &flat, op, &rule) {
                Ok(q) => {
                    let c = classical_expected_utility(joint, op)?;
                    ensure!((q - c).abs() <= 1e-9, "{}", ctx(&format!("EU {q} vs classical {c}")));
                }
                Err(Error::NoClassicalSupport(_)) => {}
                Err(e) => return Err(ctx(&e.to_string()).into()),
            }
        }
        evaluated[4] += 1;

        // (f)
        let k = rng.gen_range(0.01..100.0);
        let scaled: Vec<_> = ops.iter().map(|o| o.scaled(k)).collect();
        match (
            meu_decision(joint, &phases, &ops, &rule),
            meu_decision(joint, &phases, &scaled, &rule),
        ) {
            (Ok(a), Ok(b)) => {
                let tie = a.margin <= 1e-9 * a.utilities[a.chosen].abs().max(1.0);
                ensure!(
                    tie || a.chosen == b.chosen,
                    "{}",
                    ctx(&format!("scaling by {k} changed the choice"))
                );
                evaluated[5] += 1;
            }
            (Err(_), Err(_)) => {}
            _ => return Err(ctx("scaling changed whether the decision is defined").into()),
        }
    }
    for (label, count) in ["a", "b", "c", "d", "e", "f"].iter().zip(evaluated) {
        ensure!(count >= 200, "({label}) only evaluated on {count} networks");
    }
    Ok(())
}

fn sweep_structure() -> Check {
    let (s, rule) = pd();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    for name in ["first.csv", "second.csv"] {
        let path = dir.path().join(name);
        qlbn_cli::run(["qlbn", "sweep", "--out", path.to_str().unwrap()], &mut Vec::new())
            .map_err(|e| e.to_string())?;
        csv.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure!(csv[0] == csv[1], "CSV differs between runs");
    let rows = csv[0].iter().filter(|&&b| b == b'\n').count();
    ensure!(rows == 1 + 361 * 361, "{rows} lines");

    let grid = sweep(&s.joint, &s.operators, &rule, 361, DEFAULT_EPSILON)?;
    let labelled: usize = Region::ALL.iter().map(|&r| grid.count(r)).sum();
    ensure!(
        labelled == grid.points.len(),
        "{labelled} of {} points labelled",
        grid.points.len()
    );
    for p in &grid.points {
        let e = p.evaluation.as_ref().map_err(|e| e.to_string())?;
        ensure!(
            (e.region == Region::Irrational) == (e.chosen != grid.default_action),
            "region/choice mismatch at ({}, {})",
            p.theta_a,
            p.theta_b
        );
    }
    let anchor = grid.point(90, 90);
    ensure!(
        (anchor.theta_a - FRAC_PI_2).abs() < 1e-12 && anchor.region() == Some(Region::FullyClassical),
        "(pi/2, pi/2) is {:?}",
        anchor.region()
    );
    ensure!(grid.count(Region::Irrational) > 0, "no irrational points");
    ensure!(
        (grid.point(180, 0).theta_a - PI).abs() < 1e-12,
        "row 180 is not theta_a = pi"
    );
    for c in 0..361 {
        ensure!(
            grid.point(180, c).region() == Some(Region::Irrational),
            "(pi, column {c}) not irrational"
        );
    }
    ensure!(
        grid.count(Region::Irrational) == PINNED_IRRATIONAL,
        "irrational count {} differs from pinned {PINNED_IRRATIONAL}",
        grid.count(Region::Irrational)
    );
    Ok(())
}

fn curve_periodicity() -> Check {
    let (s, _) = pd();
    for axis in 0..2 {
        for fixed in [0.0, 1.0, FRAC_PI_2, PI, 4.5] {
            for resolution in [2, 73, 361] {
                let curve = probability_curve(&s.joint, "P2", axis, fixed, resolution)?;
                let (first, last) = (&curve[0], &curve[resolution - 1]);
                for (a, b) in first.probabilities.iter().zip(&last.probabilities) {
                    ensure!((a - b).abs() <= 1e-12, "axis {axis}, fixed {fixed}: {a} vs {b}");
                }
            }
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("curve.csv");
    qlbn_cli::run(["qlbn", "curve", "--out", path.to_str().unwrap()], &mut Vec::new()).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    let values = |l: &str| {
        l.split(',')
            .skip(1)
            .map(|v| v.parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    for (a, b) in values(lines[1]).iter().zip(values(lines[lines.len() - 1])) {
        ensure!((a - b).abs() <= 1e-12, "emitted curve: {a} vs {b}");
    }
    Ok(())
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "certainty conditions 0.97 / 0.84 (1e-12)",
            limit: Duration::from_secs(1),
            run: certainty_conditions,
        },
        Criterion {
            id: 2,
            name: "classical baseline 0.905 at pi/2 (1e-9)",
            limit: Duration::from_secs(1),
            run: classical_baseline,
        },
        Criterion {
            id: 3,
            name: "disjunction effect 0.63 +- 0.02, fit in [2.8148, 2.8168]",
            limit: Duration::from_secs(1),
            run: disjunction_effect,
        },
        Criterion {
            id: 4,
            name: "off-diagonals 0.451331 / 0.034641 (1e-6)",
            limit: Duration::from_secs(1),
            run: interference_coefficients,
        },
        Criterion {
            id: 5,
            name: "Coop dominates on theta_Def = pi (360 samples)",
            limit: Duration::from_secs(5),
            run: cooperate_dominance,
        },
        Criterion {
            id: 6,
            name: "property suite on 256 random networks",
            limit: Duration::from_secs(60),
            run: property_suite,
        },
        Criterion {
            id: 7,
            name: "sweep determinism and region structure at 361",
            limit: Duration::from_secs(30),
            run: sweep_structure,
        },
        Criterion {
            id: 8,
            name: "criteria 5 and 7 plus curve periodicity (1e-12)",
            limit: Duration::from_secs(30),
            run: curve_periodicity,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut outcomes = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(Failure(msg))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            if elapsed <= c.limit {
                Ok(())
            } else {
                Err(Failure(format!("took {elapsed:?}, limit {:?}", c.limit)))
            }
        });
        outcomes.push((c.id, result.is_ok()));
        match &result {
            Ok(()) => println!("criterion {}: PASS  {} [{:.0?}]", c.id, c.name, elapsed),
            Err(Failure(why)) => println!("criterion {}: FAIL  {} [{:.0?}]: {why}", c.id, c.name, elapsed),
        }
    }
    // 8 leans on 5 and 7
    let passed = |id: u8| outcomes.iter().any(|&(i, ok)| i == id && ok);
    if passed(8) && !(passed(5) && passed(7)) {
        println!("criterion 8: FAIL  depends on criteria 5 and 7");
        outcomes.push((8, false));
    }
    let failures = outcomes.iter().filter(|(_, ok)| !ok).count();
    println!("{} criteria, {failures} failed", criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
