//! One protocol round, written once and run two ways.
//!
//! [`propagate`] spells out the round: Eve's forward pass, Bob's action, Eve's
//! optional probe measurement, the return trip through Eve's backward pass and
//! Alice's measurement. A [`Propagator`] decides what a measurement means:
//! [`Sampled`] draws one Born outcome per measurement, [`Exact`] keeps every
//! branch with its probability. The protocol engine uses the former and the
//! robustness checker the latter, so both see the same physics.

use rand::Rng;

use crate::adversary::{AttackModel, MidPolicy};
use crate::protocol::BobAction;
use crate::quantum::{Basis, StateVector, Unitary};

/// Qubit index of the transmitted qubit inside the joint register.
pub(crate) const TRANSMITTED: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Variant {
    /// Bob always returns a qubit, resending what he measured.
    Full,
    /// Bob keeps the qubits he measures; only reflected ones come back.
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Bob,
    Alice,
    Eve,
}

/// Classical outcomes produced along one branch of a round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Classical {
    pub bob_bit: Option<u8>,
    pub alice_return: Option<u8>,
    /// Eve's probe outcomes, first measured qubit most significant.
    pub eve: Option<u32>,
}

impl Classical {
    fn record(&mut self, slot: Slot, bit: u8) {
        match slot {
            Slot::Bob => self.bob_bit = Some(bit),
            Slot::Alice => self.alice_return = Some(bit),
            Slot::Eve => self.eve = Some((self.eve.unwrap_or(0) << 1) | bit as u32),
        }
    }
}

pub(crate) trait Propagator {
    fn apply(&mut self, u: &Unitary);
    fn measure(&mut self, qubit: usize, basis: Basis, slot: Slot);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RoundPlan {
    pub action: BobAction,
    pub variant: Variant,
    /// Basis of Alice's measurement on the returned qubit; `None` skips it.
    pub alice_basis: Option<Basis>,
    /// Whether Eve reads out a probe she did not measure mid-round.
    pub eve_reads_held_probe: bool,
}

impl RoundPlan {
    pub fn qubit_returns(&self) -> bool {
        self.variant == Variant::Full || self.action == BobAction::Ctrl
    }
}

/// Alice's qubit next to a fresh probe.
pub(crate) fn initial_state(model: &AttackModel, bit: u8, basis: Basis) -> StateVector {
    let qubit = StateVector::basis_state(bit, basis);
    match model.probe_qubits() {
        0 => qubit,
        p => qubit.tensor(&StateVector::zero(p)),
    }
}

pub(crate) fn propagate<P: Propagator>(p: &mut P, model: &AttackModel, plan: &RoundPlan) {
    let probe = 1..=model.probe_qubits();

    p.apply(model.forward());

    if plan.action == BobAction::Sift {
        p.measure(TRANSMITTED, Basis::Z, Slot::Bob);
    }

    let measured_mid = model.mid_policy() == MidPolicy::MeasureProbeZ;
    if measured_mid {
        for q in probe.clone() {
            p.measure(q, Basis::Z, Slot::Eve);
        }
    }

    if plan.qubit_returns() {
        p.apply(model.backward());
        if let Some(basis) = plan.alice_basis {
            p.measure(TRANSMITTED, basis, Slot::Alice);
        }
    }

    if !measured_mid && plan.eve_reads_held_probe {
        for q in probe {
            p.measure(q, Basis::Z, Slot::Eve);
        }
    }
}

/// Single sampled trajectory.
pub(crate) struct Sampled<'r, R: Rng + ?Sized> {
    pub state: StateVector,
    pub classical: Classical,
    rng: &'r mut R,
}

impl<'r, R: Rng + ?Sized> Sampled<'r, R> {
    pub fn new(state: StateVector, rng: &'r mut R) -> Self {
        Sampled {
            state,
            classical: Classical::default(),
            rng,
        }
    }
}

impl<R: Rng + ?Sized> Propagator for Sampled<'_, R> {
    fn apply(&mut self, u: &Unitary) {
        self.state = self
            .state
            .apply_all(u)
            .expect("attack unitaries match the joint register");
    }

    fn measure(&mut self, qubit: usize, basis: Basis, slot: Slot) {
        let r: f64 = self.rng.random();
        let (bit, post) = self.state.measure(qubit, basis, r);
        self.state = post;
        self.classical.record(slot, bit);
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Branch {
    pub weight: f64,
    pub state: StateVector,
    pub classical: Classical,
}

/// Every measurement branch, weighted by its Born probability.
pub(crate) struct Exact {
    pub branches: Vec<Branch>,
}

impl Exact {
    pub fn new(state: StateVector) -> Self {
        Exact {
            branches: vec![Branch {
                weight: 1.0,
                state,
                classical: Classical::default(),
            }],
        }
    }

    /// Total weight of branches matching `pred`.
    pub fn probability(&self, pred: impl Fn(&Classical) -> bool) -> f64 {
        self.branches
            .iter()
            .filter(|b| pred(&b.classical))
            .map(|b| b.weight)
            .sum()
    }
}

impl Propagator for Exact {
    fn apply(&mut self, u: &Unitary) {
        for b in &mut self.branches {
            b.state = b
                .state
                .apply_all(u)
                .expect("attack unitaries match the joint register");
        }
    }

    fn measure(&mut self, qubit: usize, basis: Basis, slot: Slot) {
        let mut next = Vec::with_capacity(self.branches.len() * 2);
        for b in self.branches.drain(..) {
            for bit in 0..=1u8 {
                if let Some((p, state)) = b.state.project(qubit, basis, bit) {
                    let mut classical = b.classical;
                    classical.record(slot, bit);
                    next.push(Branch {
                        weight: b.weight * p,
                        state,
                        classical,
                    });
                }
            }
        }
        self.branches = next;
    }
}
