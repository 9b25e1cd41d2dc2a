//! Exact per-round analysis of an attack: structure checks, detection
//! probabilities, Eve's final states, and the check that zero disturbance
//! leaves Eve with zero information.
//!
//! Everything here enumerates measurement branches instead of sampling, and
//! runs the same round code as the protocol engine. Statements are per round:
//! each round carries a fresh probe, so statements about `N` rounds factor.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{build_attack, AttackError, AttackModel, AttackSpec, MidPolicy};
use crate::protocol::{BobAction, ProtocolKind};
use crate::quantum::{Basis, DensityMatrix, QuantumError, StateVector, Unitary, AGGREGATE_TOLERANCE};
use crate::round::{self, Exact, RoundPlan, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustnessError {
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("sweep grid must be sorted ascending")]
    UnsortedGrid,
}

/// Norm of the part of `state` whose transmitted qubit reads `1 - i`.
fn cross_norm(state: &StateVector, i: u8) -> f64 {
    let half = state.amplitudes().len() / 2;
    let wrong = if i == 0 { half..2 * half } else { 0..half };
    state.amplitudes()[wrong].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Whether `u |i>|0^E> = |i>|E_i>` for both `i`, i.e. the forward pass never
/// flips the transmitted Z value. Returns the verdict and the largest cross
/// term norm `|E_{i,1-i}|`.
pub fn check_forward_structure(u_forward: &Unitary, probe_qubits: usize) -> Result<(bool, f64), QuantumError> {
    let n = 1 + probe_qubits;
    if u_forward.num_qubits() != n {
        return Err(QuantumError::DimensionMismatch {
            expected: 1 << n,
            actual: u_forward.dim(),
        });
    }
    let mut worst = 0.0f64;
    for i in 0..=1u8 {
        let out = StateVector::computational(n, (i as usize) << probe_qubits).apply_all(u_forward)?;
        worst = worst.max(cross_norm(&out, i));
    }
    Ok((worst < AGGREGATE_TOLERANCE, worst))
}

/// The backward counterpart: after Bob reads `i` and resends it, and after
/// Eve's mid-round measurement if any, the backward pass must leave the
/// transmitted qubit at `|i>`. Cross terms are taken on the unnormalized
/// branches, so improbable branches weigh less.
pub fn check_backward_structure(model: &AttackModel) -> (bool, f64) {
    let plan = RoundPlan {
        action: BobAction::Sift,
        variant: Variant::Full,
        alice_basis: None,
        eve_reads_held_probe: false,
    };
    let mut worst = 0.0f64;
    for i in 0..=1u8 {
        let mut exact = Exact::new(round::initial_state(model, i, Basis::Z));
        round::propagate(&mut exact, model, &plan);
        for b in exact.branches.iter().filter(|b| b.classical.bob_bit == Some(i)) {
            worst = worst.max(b.weight.sqrt() * cross_norm(&b.state, i));
        }
    }
    (worst < AGGREGATE_TOLERANCE, worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DetectionClass {
    Test,
    ZCtrl,
    XCtrl,
}

impl DetectionClass {
    pub const ALL: [DetectionClass; 3] = [DetectionClass::Test, DetectionClass::ZCtrl, DetectionClass::XCtrl];

    fn round(self) -> (Basis, BobAction) {
        match self {
            DetectionClass::Test => (Basis::Z, BobAction::Sift),
            DetectionClass::ZCtrl => (Basis::Z, BobAction::Ctrl),
            DetectionClass::XCtrl => (Basis::X, BobAction::Ctrl),
        }
    }
}

/// Probability that a round of `class` shows a mismatch, averaged over
/// Alice's two bit values. Identical for the mock protocol, whose TEST and
/// CTRL rounds run the same way.
pub fn exact_detection_probability(model: &AttackModel, class: DetectionClass) -> f64 {
    let (basis, action) = class.round();
    let plan = RoundPlan {
        action,
        variant: Variant::Full,
        alice_basis: (action == BobAction::Ctrl).then_some(basis),
        eve_reads_held_probe: false,
    };
    let total: f64 = (0..=1u8)
        .map(|bit| {
            let mut exact = Exact::new(round::initial_state(model, bit, basis));
            round::propagate(&mut exact, model, &plan);
            exact.probability(|c| match class {
                DetectionClass::Test => c.bob_bit != Some(bit),
                _ => c.alice_return != Some(bit),
            })
        })
        .sum();
    // adding 0.0 turns a -0.0 from cancelling branches into 0.0
    (total / 2.0).clamp(0.0, 1.0) + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub test: f64,
    pub z_ctrl: f64,
    pub x_ctrl: f64,
}

impl Detection {
    pub fn of(model: &AttackModel) -> Self {
        Detection {
            test: exact_detection_probability(model, DetectionClass::Test),
            z_ctrl: exact_detection_probability(model, DetectionClass::ZCtrl),
            x_ctrl: exact_detection_probability(model, DetectionClass::XCtrl),
        }
    }

    pub fn max(&self) -> f64 {
        self.test.max(self.z_ctrl).max(self.x_ctrl)
    }
}

/// Eve's state at the end of a Z-SIFT round of the full protocol, for Alice's
/// bit 0 and 1.
pub fn eve_final_states(model: &AttackModel) -> Result<[DensityMatrix; 2], QuantumError> {
    eve_final_states_in(model, ProtocolKind::Full)
}

/// As [`eve_final_states`], for either protocol.
///
/// Alice's and Bob's systems are traced out. Attacks without a probe get one
/// idle probe qubit. When Eve measured her probe mid-round her state is
/// classical-quantum: a register holding her outcomes in front of the probe.
pub fn eve_final_states_in(model: &AttackModel, kind: ProtocolKind) -> Result<[DensityMatrix; 2], QuantumError> {
    let model = model.with_min_probe(1);
    let p = model.probe_qubits();
    let probe: Vec<usize> = (1..=p).collect();
    let plan = RoundPlan {
        action: BobAction::Sift,
        variant: match kind {
            ProtocolKind::Full => Variant::Full,
            ProtocolKind::Mock => Variant::Mock,
        },
        alice_basis: None,
        eve_reads_held_probe: false,
    };
    let measured = model.mid_policy() == MidPolicy::MeasureProbeZ;
    let state_for = |bit: u8| -> Result<DensityMatrix, QuantumError> {
        let mut exact = Exact::new(round::initial_state(&model, bit, Basis::Z));
        round::propagate(&mut exact, &model, &plan);
        let registers = if measured { 1 << p } else { 1 };
        let mut blocks = vec![DensityMatrix::zeros(1 << p); registers];
        for b in &exact.branches {
            let k = if measured { b.classical.eve.unwrap_or(0) as usize } else { 0 };
            blocks[k].add_scaled(b.weight, &b.state.partial_trace(&probe)?);
        }
        if measured {
            DensityMatrix::classical_quantum(&blocks)
        } else {
            Ok(blocks.pop().expect("one block"))
        }
    };
    Ok([state_for(0)?, state_for(1)?])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackAnalysis {
    pub attack: String,
    pub probe_qubits: usize,
    pub forward_structured: bool,
    pub backward_structured: bool,
    /// Largest cross term found by either structure check.
    pub max_offdiagonal: f64,
    pub detection: Detection,
    #[serde(skip)]
    pub eve_f_states: [DensityMatrix; 2],
    /// `1 - F(rho_0, rho_1)` with `F` the root fidelity, which is
    /// `1 - |<F_0|F_1>|` for pure states.
    pub max_f_state_distance: f64,
    pub trace_distance: f64,
    /// Helstrom success probability for guessing a Z-SIFT bit.
    pub helstrom_info: f64,
}

impl AttackAnalysis {
    pub fn info_advantage(&self) -> f64 {
        self.helstrom_info - 0.5
    }
}

pub fn analyze(model: &AttackModel) -> Result<AttackAnalysis, QuantumError> {
    let (fwd, off_fwd) = check_forward_structure(model.forward(), model.probe_qubits())?;
    let (bwd, off_bwd) = check_backward_structure(model);
    let [rho0, rho1] = eve_final_states(model)?;
    let max_f_state_distance = (1.0 - rho0.fidelity(&rho1)).clamp(0.0, 1.0);
    let trace_distance = rho0.trace_distance(&rho1);
    Ok(AttackAnalysis {
        attack: model.label().to_string(),
        probe_qubits: model.probe_qubits(),
        forward_structured: fwd,
        backward_structured: bwd,
        max_offdiagonal: off_fwd.max(off_bwd),
        detection: Detection::of(model),
        max_f_state_distance,
        trace_distance,
        helstrom_info: 0.5 + trace_distance / 2.0,
        eve_f_states: [rho0, rho1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Detection probabilities below this count as zero disturbance.
    pub disturbance: f64,
    /// Helstrom advantages above this count as information.
    pub info: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            disturbance: 1e-9,
            info: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    /// False only for an attack that is undetectable yet informative.
    pub pass: bool,
    pub zero_disturbance: bool,
    pub informative: bool,
    pub analysis: AttackAnalysis,
}

pub fn verify_theorem(model: &AttackModel, tol: Tolerances) -> Result<Verdict, QuantumError> {
    let analysis = analyze(model)?;
    let zero_disturbance = analysis.detection.max() < tol.disturbance;
    let informative = analysis.info_advantage() > tol.info;
    Ok(Verdict {
        pass: !(zero_disturbance && informative),
        zero_disturbance,
        informative,
        analysis,
    })
}

/// Families of random attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackFamily {
    /// Independent Haar-like forward and backward unitaries.
    Generic,
    /// `sum_i |i><i| (x) V_i` forward and `sum_i |i><i| (x) W_i` backward:
    /// never flips a Z value, so only X-CTRL rounds can notice it.
    Controlled,
    /// A controlled forward pass undone on the way back, followed by a fixed
    /// probe unitary `W`: undetectable when Eve does not measure mid-round.
    Erasing,
}

impl AttackFamily {
    pub const ALL: [AttackFamily; 3] = [AttackFamily::Generic, AttackFamily::Controlled, AttackFamily::Erasing];
}

pub fn random_attack<R: Rng + ?Sized>(
    family: AttackFamily,
    probe_qubits: usize,
    mid_policy: MidPolicy,
    rng: &mut R,
) -> AttackModel {
    let p = probe_qubits;
    let controlled = |rng: &mut R| {
        Unitary::block_diagonal(&Unitary::random(p, rng), &Unitary::random(p, rng))
            .expect("equal block sizes")
    };
    let (forward, backward) = match family {
        AttackFamily::Generic => (Unitary::random(1 + p, rng), Unitary::random(1 + p, rng)),
        AttackFamily::Controlled => (controlled(rng), controlled(rng)),
        AttackFamily::Erasing => {
            let forward = controlled(rng);
            let w = Unitary::identity(1).kron(&Unitary::random(p, rng));
            let backward = w.mul(&forward.adjoint()).expect("same dimension");
            (forward, backward)
        }
    };
    build_attack(&AttackSpec::CustomUnitary {
        forward,
        backward,
        mid_policy,
    })
    .expect("random unitaries are unitary")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomAttackCase {
    pub index: usize,
    pub family: AttackFamily,
    pub probe_qubits: usize,
    pub mid_policy: MidPolicy,
    #[serde(skip)]
    pub model: AttackModel,
}

/// `count` reproducible random attacks cycling through the families, with one
/// or two probe qubits and a random mid-round policy.
pub fn sample_random_attacks(count: usize, seed: u64) -> Vec<RandomAttackCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    (0..count)
        .map(|index| {
            let family = AttackFamily::ALL[index % 3];
            let probe_qubits = 1 + (index / 3) % 2;
            let mid_policy = if rng.random_bool(0.5) {
                MidPolicy::MeasureProbeZ
            } else {
                MidPolicy::None
            };
            let model = random_attack(family, probe_qubits, mid_policy, &mut rng);
            RandomAttackCase {
                index,
                family,
                probe_qubits,
                mid_policy,
                model,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    /// Largest detection probability over the three classes.
    pub disturbance: f64,
    pub info_advantage: f64,
}

/// `points` evenly spaced angles from 0 to pi/2 inclusive.
pub fn even_grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| {
                if k + 1 == points {
                    FRAC_PI_2
                } else {
                    FRAC_PI_2 * k as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn sweep_row(theta: f64) -> Result<SweepRow, RobustnessError> {
    let model = build_attack(&AttackSpec::RotationProbe { theta })?;
    let analysis = analyze(&model)?;
    Ok(SweepRow {
        theta,
        disturbance: analysis.detection.max(),
        info_advantage: analysis.info_advantage(),
    })
}

/// Exact information/disturbance trade-off of the rotation-probe family.
pub fn info_disturbance_sweep(grid: &[f64]) -> Result<Vec<SweepRow>, RobustnessError> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(RobustnessError::UnsortedGrid);
    }
    grid.iter().map(|&theta| sweep_row(theta)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn model(s: &str) -> AttackModel {
        build_attack(&s.parse().unwrap()).unwrap()
    }

    /// The joint state of a Z-CTRL round just before Alice measures.
    fn z_ctrl_state(model: &AttackModel, bit: u8) -> Vec<(f64, StateVector)> {
        let plan = RoundPlan {
            action: BobAction::Ctrl,
            variant: Variant::Full,
            alice_basis: None,
            eve_reads_held_probe: false,
        };
        let mut exact = Exact::new(round::initial_state(model, bit, Basis::Z));
        round::propagate(&mut exact, model, &plan);
        exact.branches.into_iter().map(|b| (b.weight, b.state)).collect()
    }

    const BUILTINS: [&str; 7] = [
        "none",
        "measure-resend:z",
        "measure-resend:x",
        "measure-resend:random",
        "cnot-probe",
        "cnot-probe:mid",
        "rotation:0.6",
    ];

    #[test]
    fn forward_structure_examples() {
        assert_eq!(check_forward_structure(&Unitary::identity(2), 1).unwrap(), (true, 0.0));
        assert_eq!(check_forward_structure(&Unitary::cnot(), 1).unwrap(), (true, 0.0));
        let h = Unitary::hadamard().kron(&Unitary::identity(1));
        let (ok, off) = check_forward_structure(&h, 1).unwrap();
        assert!(!ok);
        assert!((off - FRAC_1_SQRT_2).abs() < 1e-10);
        let (ok, off) = check_forward_structure(&Unitary::hadamard(), 0).unwrap();
        assert!(!ok && (off - FRAC_1_SQRT_2).abs() < 1e-10);
        assert!(check_forward_structure(&Unitary::cnot(), 2).is_err());
    }

    #[test]
    fn detection_table() {
        // branch-enumeration oracle values for each built-in
        let expected = [
            ("none", [0.0, 0.0, 0.0]),
            ("measure-resend:z", [0.0, 0.0, 0.5]),
            ("measure-resend:x", [0.5, 0.5, 0.0]),
            ("measure-resend:random", [0.25, 0.25, 0.25]),
            ("cnot-probe", [0.0, 0.0, 0.0]),
            ("cnot-probe:mid", [0.0, 0.0, 0.5]),
        ];
        for (s, [t, z, x]) in expected {
            let d = Detection::of(&model(s));
            assert!((d.test - t).abs() < 1e-12, "{s} test {}", d.test);
            assert!((d.z_ctrl - z).abs() < 1e-12, "{s} z {}", d.z_ctrl);
            assert!((d.x_ctrl - x).abs() < 1e-12, "{s} x {}", d.x_ctrl);
        }
    }

    #[test]
    fn rotation_closed_forms() {
        for k in 0..=8 {
            let theta = FRAC_PI_2 * k as f64 / 8.0;
            let row = sweep_row(theta).unwrap();
            assert!((row.disturbance - (1.0 - theta.cos()) / 2.0).abs() < 1e-12, "{theta}");
            assert!((row.info_advantage - theta.sin().powi(2) / 2.0).abs() < 1e-12, "{theta}");
        }
    }

    #[test]
    fn sweep_endpoints_and_order() {
        let grid = even_grid(9);
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[8], FRAC_PI_2);
        let rows = info_disturbance_sweep(&grid).unwrap();
        assert_eq!((rows[0].disturbance, rows[0].info_advantage), (0.0, 0.0));
        for w in rows.windows(2) {
            assert!(w[1].disturbance > w[0].disturbance);
            assert!(w[1].info_advantage > w[0].info_advantage);
        }
        let mid = analyze(&model("cnot-probe:mid")).unwrap();
        assert!((rows[8].disturbance - mid.detection.x_ctrl).abs() < 1e-9);
        assert!((rows[8].info_advantage - mid.info_advantage()).abs() < 1e-9);
        assert_eq!(
            info_disturbance_sweep(&[0.5, 0.1]),
            Err(RobustnessError::UnsortedGrid)
        );
    }

    #[test]
    fn final_state_examples() {
        let [r0, r1] = eve_final_states(&model("none")).unwrap();
        let zero = DensityMatrix::from_pure(&StateVector::zero(1));
        assert!(r0.max_abs_diff(&zero) < 1e-15 && r1.max_abs_diff(&zero) < 1e-15);

        let [r0, r1] = eve_final_states(&model("cnot-probe")).unwrap();
        assert!(r0.max_abs_diff(&r1) < 1e-12);

        // register (x) probe: |00><00| against |11><11|
        let [r0, r1] = eve_final_states(&model("measure-resend:z")).unwrap();
        assert!(r0.max_abs_diff(&DensityMatrix::from_pure(&StateVector::computational(2, 0))) < 1e-12);
        assert!(r1.max_abs_diff(&DensityMatrix::from_pure(&StateVector::computational(2, 3))) < 1e-12);
        assert!((r0.trace_distance(&r1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mock_protocol_hands_eve_the_bit() {
        let m = model("cnot-probe");
        let [r0, r1] = eve_final_states_in(&m, ProtocolKind::Mock).unwrap();
        assert!((r0.trace_distance(&r1) - 1.0).abs() < 1e-12);
        let [f0, f1] = eve_final_states(&m).unwrap();
        assert!(f0.trace_distance(&f1) < 1e-12);
    }

    #[test]
    fn builtin_verdicts() {
        for s in BUILTINS {
            let v = verify_theorem(&model(s), Tolerances::default()).unwrap();
            assert!(v.pass, "{s}");
            let a = &v.analysis;
            for p in [a.detection.test, a.detection.z_ctrl, a.detection.x_ctrl, a.helstrom_info] {
                assert!((0.0..=1.0).contains(&p));
            }
            assert!((0.0..=1.0).contains(&a.max_f_state_distance));
        }
        let mid = verify_theorem(&model("cnot-probe:mid"), Tolerances::default()).unwrap();
        assert!((mid.analysis.helstrom_info - 1.0).abs() < 1e-12);
        assert!(!mid.zero_disturbance && mid.informative);
    }

    #[test]
    fn f_states_collapse_without_disturbance() {
        for s in BUILTINS {
            let a = analyze(&model(s)).unwrap();
            if a.detection.max() < 1e-9 {
                assert!(a.max_f_state_distance < 1e-7, "{s}");
                assert!(a.trace_distance < 1e-7, "{s}");
            }
        }
    }

    #[test]
    fn structure_implies_no_z_detection() {
        for case in sample_random_attacks(60, 9) {
            let m = &case.model;
            let (fwd, _) = check_forward_structure(m.forward(), m.probe_qubits()).unwrap();
            let (bwd, _) = check_backward_structure(m);
            if fwd && bwd {
                assert!(exact_detection_probability(m, DetectionClass::Test) < 1e-10);
                assert!(exact_detection_probability(m, DetectionClass::ZCtrl) < 1e-10);
            }
            if exact_detection_probability(m, DetectionClass::Test) < 1e-10 {
                assert!(fwd, "case {}", case.index);
            }
            if case.family != AttackFamily::Generic {
                assert!(fwd && bwd, "case {}", case.index);
            }
        }
    }

    #[test]
    fn reduction_to_product_form() {
        // all-CTRL round of a structured attack: |i> (x) |F_i>, with F_i
        // recomputed on the probe alone
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let v: Vec<Unitary> = (0..4).map(|_| Unitary::random(1, &mut rng)).collect();
            let forward = Unitary::block_diagonal(&v[0], &v[1]).unwrap();
            let backward = Unitary::block_diagonal(&v[2], &v[3]).unwrap();
            let m = build_attack(&AttackSpec::CustomUnitary {
                forward,
                backward,
                mid_policy: MidPolicy::None,
            })
            .unwrap();
            for i in 0..=1u8 {
                let f = StateVector::zero(1)
                    .apply_all(&v[i as usize])
                    .unwrap()
                    .apply_all(&v[2 + i as usize])
                    .unwrap();
                let expected = StateVector::computational(1, i as usize).tensor(&f);
                let branches = z_ctrl_state(&m, i);
                assert_eq!(branches.len(), 1);
                assert!(branches[0].1.max_abs_diff(&expected) < 1e-10);
            }
        }
    }

    #[test]
    fn x_ctrl_detection_matches_f_state_overlap() {
        // For controlled attacks the X-CTRL state is (|0>|F_0> +- |1>|F_1>)/sqrt2
        // and Alice errs with probability |F_0 - F_1|^2 / 4.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for p in [1, 2] {
            for _ in 0..10 {
                let v: Vec<Unitary> = (0..4).map(|_| Unitary::random(p, &mut rng)).collect();
                let m = build_attack(&AttackSpec::CustomUnitary {
                    forward: Unitary::block_diagonal(&v[0], &v[1]).unwrap(),
                    backward: Unitary::block_diagonal(&v[2], &v[3]).unwrap(),
                    mid_policy: MidPolicy::None,
                })
                .unwrap();
                let f = |i: usize| {
                    StateVector::zero(p)
                        .apply_all(&v[i])
                        .unwrap()
                        .apply_all(&v[2 + i])
                        .unwrap()
                };
                let (f0, f1) = (f(0), f(1));
                let dist: f64 = f0
                    .amplitudes()
                    .iter()
                    .zip(f1.amplitudes())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum();
                let exact = exact_detection_probability(&m, DetectionClass::XCtrl);
                assert!((exact - dist / 4.0).abs() < 1e-10, "{exact} vs {}", dist / 4.0);
            }
        }
    }

    #[test]
    fn erasing_attacks_are_silent_and_uninformative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in [1, 2] {
            let m = random_attack(AttackFamily::Erasing, p, MidPolicy::None, &mut rng);
            let v = verify_theorem(&m, Tolerances::default()).unwrap();
            assert!(v.zero_disturbance);
            assert!(!v.informative);
            assert!(v.pass);
        }
    }

    #[test]
    fn random_attacks_satisfy_the_theorem() {
        let cases = sample_random_attacks(90, 1);
        assert_eq!(cases, sample_random_attacks(90, 1));
        let mut silent = 0;
        for case in &cases {
            let v = verify_theorem(&case.model, Tolerances::default()).unwrap();
            assert!(v.pass, "case {}", case.index);
            silent += v.zero_disturbance as usize;
        }
        assert!(silent > 0);
    }

    #[test]
    fn cq_state_is_a_density_matrix() {
        for s in ["measure-resend:random", "cnot-probe:mid", "rotation:1.1"] {
            for rho in eve_final_states(&model(s)).unwrap() {
                rho.validate().unwrap();
            }
        }
    }
}
