//! Eavesdropper models.
//!
//! Every attack is a pair of unitaries on the transmitted qubit plus a private
//! probe that starts in `|0...0>`: `forward` acts on the way to Bob and
//! `backward` on the way back, both on the same probe. An attack may also
//! measure its probe in the Z basis between the two passes. Whatever Eve does
//! with her probe, she only ever sees the transmitted qubit inside a round;
//! bases and Bob's choices reach her through [`eve_guess_info`], after they
//! are announced.
//!
//! In the joint register qubit 0 is the transmitted qubit and qubits
//! `1..=probe_qubits` are the probe.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{QuantumError, Unitary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("unknown attack `{0}` (expected none, measure-resend:z|x|random, cnot-probe[:mid], rotation:<theta>)")]
    Unknown(String),
    #[error("rotation angle {0} is outside [0, pi/2]")]
    ThetaOutOfRange(f64),
    #[error("invalid rotation angle `{0}`")]
    BadTheta(String),
    #[error("forward and backward unitaries act on different spaces ({forward} vs {backward} qubits)")]
    ShapeMismatch { forward: usize, backward: usize },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Basis choice of an intercept-resend attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisPolicy {
    AlwaysZ,
    AlwaysX,
    /// Fair coin per round, drawn quantumly from an extra probe qubit.
    UniformRandom,
}

/// What Eve does with her probe between the forward and backward passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MidPolicy {
    None,
    MeasureProbeZ,
}

/// How Eve turns her recorded probe outcomes into a guess of a SIFT bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuessRule {
    /// No useful record; always a fair coin.
    Coin,
    /// Use the Z outcome of probe qubit `k` (0-based within the probe).
    ProbeBit(usize),
    /// Use `value` only when `basis` read 0 (she measured in Z); coin otherwise.
    BasisTagged { basis: usize, value: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackSpec {
    NoAttack,
    MeasureResend(BasisPolicy),
    CnotProbe {
        measure_mid: bool,
    },
    /// Controlled `R_y(2 theta)` from the transmitted qubit onto a one-qubit probe.
    RotationProbe {
        theta: f64,
    },
    CustomUnitary {
        forward: Unitary,
        backward: Unitary,
        mid_policy: MidPolicy,
    },
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::NoAttack => f.write_str("none"),
            AttackSpec::MeasureResend(BasisPolicy::AlwaysZ) => f.write_str("measure-resend:z"),
            AttackSpec::MeasureResend(BasisPolicy::AlwaysX) => f.write_str("measure-resend:x"),
            AttackSpec::MeasureResend(BasisPolicy::UniformRandom) => {
                f.write_str("measure-resend:random")
            }
            AttackSpec::CnotProbe { measure_mid: true } => f.write_str("cnot-probe:mid"),
            AttackSpec::CnotProbe { measure_mid: false } => f.write_str("cnot-probe"),
            AttackSpec::RotationProbe { theta } => write!(f, "rotation:{theta}"),
            AttackSpec::CustomUnitary { forward, .. } => {
                write!(f, "custom:{}q", forward.num_qubits())
            }
        }
    }
}

impl FromStr for AttackSpec {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let spec = match (name, arg) {
            ("none", None) => AttackSpec::NoAttack,
            ("measure-resend", Some("z")) => AttackSpec::MeasureResend(BasisPolicy::AlwaysZ),
            ("measure-resend", Some("x")) => AttackSpec::MeasureResend(BasisPolicy::AlwaysX),
            ("measure-resend", Some("random")) => {
                AttackSpec::MeasureResend(BasisPolicy::UniformRandom)
            }
            ("cnot-probe", None) => AttackSpec::CnotProbe { measure_mid: false },
            ("cnot-probe", Some("mid")) => AttackSpec::CnotProbe { measure_mid: true },
            ("rotation", Some(theta)) => {
                let theta: f64 = theta
                    .parse()
                    .map_err(|_| AttackError::BadTheta(theta.to_string()))?;
                validate_theta(theta)?;
                AttackSpec::RotationProbe { theta }
            }
            _ => return Err(AttackError::Unknown(s.to_string())),
        };
        Ok(spec)
    }
}

fn validate_theta(theta: f64) -> Result<(), AttackError> {
    if theta.is_finite() && (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(AttackError::ThetaOutOfRange(theta))
    }
}

/// A fully specified per-round attack.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackModel {
    label: String,
    probe_qubits: usize,
    forward: Unitary,
    backward: Unitary,
    mid_policy: MidPolicy,
    guess_rule: GuessRule,
}

impl AttackModel {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn probe_qubits(&self) -> usize {
        self.probe_qubits
    }

    pub fn forward(&self) -> &Unitary {
        &self.forward
    }

    pub fn backward(&self) -> &Unitary {
        &self.backward
    }

    pub fn mid_policy(&self) -> MidPolicy {
        self.mid_policy
    }

    pub fn guess_rule(&self) -> GuessRule {
        self.guess_rule
    }

    /// Joint register width: transmitted qubit plus probe.
    pub fn joint_qubits(&self) -> usize {
        1 + self.probe_qubits
    }

    /// Pads the probe with idle qubits so it has at least `min_probe` qubits.
    pub fn with_min_probe(&self, min_probe: usize) -> AttackModel {
        if self.probe_qubits >= min_probe {
            return self.clone();
        }
        let pad = Unitary::identity(min_probe - self.probe_qubits);
        AttackModel {
            label: self.label.clone(),
            probe_qubits: min_probe,
            forward: self.forward.kron(&pad),
            backward: self.backward.kron(&pad),
            mid_policy: self.mid_policy,
            guess_rule: self.guess_rule,
        }
    }
}

pub fn build_attack(spec: &AttackSpec) -> Result<AttackModel, AttackError> {
    let label = spec.to_string();
    let model = match spec {
        AttackSpec::NoAttack => AttackModel {
            label,
            probe_qubits: 0,
            forward: Unitary::identity(1),
            backward: Unitary::identity(1),
            mid_policy: MidPolicy::None,
            guess_rule: GuessRule::Coin,
        },
        AttackSpec::MeasureResend(policy) => measure_resend(label, *policy)?,
        AttackSpec::CnotProbe { measure_mid } => AttackModel {
            label,
            probe_qubits: 1,
            forward: Unitary::cnot(),
            backward: Unitary::cnot(),
            mid_policy: if *measure_mid {
                MidPolicy::MeasureProbeZ
            } else {
                MidPolicy::None
            },
            guess_rule: GuessRule::ProbeBit(0),
        },
        AttackSpec::RotationProbe { theta } => {
            validate_theta(*theta)?;
            AttackModel {
                label,
                probe_qubits: 1,
                forward: Unitary::controlled(&Unitary::ry(2.0 * theta)),
                backward: Unitary::identity(2),
                mid_policy: MidPolicy::MeasureProbeZ,
                guess_rule: GuessRule::ProbeBit(0),
            }
        }
        AttackSpec::CustomUnitary {
            forward,
            backward,
            mid_policy,
        } => {
            if forward.dim() != backward.dim() {
                return Err(AttackError::ShapeMismatch {
                    forward: forward.num_qubits(),
                    backward: backward.num_qubits(),
                });
            }
            let probe_qubits = forward.num_qubits() - 1;
            AttackModel {
                label,
                probe_qubits,
                forward: forward.clone(),
                backward: backward.clone(),
                mid_policy: *mid_policy,
                guess_rule: if probe_qubits > 0 {
                    GuessRule::ProbeBit(0)
                } else {
                    GuessRule::Coin
                },
            }
        }
    };
    Ok(model)
}

/// Intercept-resend expressed as a probe interaction: copying the
/// transmitted qubit's value (in the chosen basis frame) into the probe and
/// measuring the probe collapses the qubit exactly as a direct measurement
/// followed by a resend of the result would.
fn measure_resend(label: String, policy: BasisPolicy) -> Result<AttackModel, AttackError> {
    let h = Unitary::hadamard();
    let (probe_qubits, forward, guess_rule) = match policy {
        BasisPolicy::AlwaysZ => (1, Unitary::cnot(), GuessRule::ProbeBit(0)),
        BasisPolicy::AlwaysX => {
            let h_t = h.embed(&[0], 2)?;
            (
                1,
                Unitary::sequence(&[&h_t, &Unitary::cnot(), &h_t])?,
                GuessRule::ProbeBit(0),
            )
        }
        BasisPolicy::UniformRandom => {
            // register: transmitted (0), basis coin (1), copied value (2)
            let coin = h.embed(&[1], 3)?;
            let ch = Unitary::controlled(&h).embed(&[1, 0], 3)?;
            let copy = Unitary::cnot().embed(&[0, 2], 3)?;
            (
                2,
                Unitary::sequence(&[&coin, &ch, &copy, &ch])?,
                GuessRule::BasisTagged { basis: 0, value: 1 },
            )
        }
    };
    Ok(AttackModel {
        label,
        probe_qubits,
        forward,
        backward: Unitary::identity(probe_qubits + 1),
        mid_policy: MidPolicy::MeasureProbeZ,
        guess_rule,
    })
}

/// Classical record Eve keeps for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EveNotes {
    /// Z outcomes of the probe, probe qubit 0 as the most significant bit.
    /// Taken between the passes under [`MidPolicy::MeasureProbeZ`], otherwise
    /// on the held probe once the announcements are public. `None` when the
    /// attack has no probe.
    pub probe_outcomes: Option<u32>,
}

impl EveNotes {
    fn probe_bit(&self, probe_qubits: usize, k: usize) -> Option<u8> {
        self.probe_outcomes
            .map(|bits| ((bits >> (probe_qubits - 1 - k)) & 1) as u8)
    }
}

/// Eve's guess for each round in `indices`.
///
/// Rounds without a usable record get a fair coin from `eve_rng`, which must
/// be Eve's own stream so that her guessing never perturbs protocol
/// randomness.
pub fn eve_guess_info<R: Rng + ?Sized>(
    model: &AttackModel,
    notes: &[EveNotes],
    indices: &[usize],
    eve_rng: &mut R,
) -> Vec<u8> {
    let p = model.probe_qubits;
    indices
        .iter()
        .map(|&i| {
            let note = &notes[i];
            let recorded = match model.guess_rule {
                GuessRule::Coin => None,
                GuessRule::ProbeBit(k) => note.probe_bit(p, k),
                GuessRule::BasisTagged { basis, value } => match note.probe_bit(p, basis) {
                    Some(0) => note.probe_bit(p, value),
                    _ => None,
                },
            };
            recorded.unwrap_or_else(|| eve_rng.random_range(0..=1u8))
        })
        .collect()
}
