//! The semi-quantum protocol engine, run round by round.
//!
//! What the engine does, in order:
//!
//! - Alice prepares `N = ceil(8 n (1 + delta))` random qubits, each in Z or X.
//! - Bob reflects each qubit (CTRL) or measures it in Z and resends the
//!   result (SIFT). The qubits go back in the order they arrived.
//! - Alice measures every returned qubit in the basis she prepared it in.
//! - Alice announces her Z rounds, Bob his SIFT rounds; rounds are classified.
//! - Abort if the Z-CTRL or X-CTRL error rate exceeds `p_ctrl`.
//! - Alice picks `n` random SIFT rounds as TEST, Bob reveals them; abort if
//!   the TEST error rate exceeds `p_test`.
//! - The first `n` remaining SIFT rounds form the INFO string.
//! - Error correction and privacy amplification produce the final key.
//!
//! Each round uses a fresh probe for Eve (collective attacks), so the joint
//! state never grows beyond one transmitted qubit plus her probe.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{eve_guess_info, AttackModel, EveNotes};
use crate::postprocessing::{reconcile_and_amplify, LinearCode, PostprocessOutcome};
use crate::quantum::{Basis, StateVector};
use crate::round::{self, RoundPlan, Sampled, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Desired INFO length in bits.
    pub n: usize,
    pub delta: f64,
    /// Abort threshold applied to both the Z-CTRL and X-CTRL error rates.
    pub p_ctrl: f64,
    pub p_test: f64,
    pub seed: u64,
    /// Bits withheld from the final key beyond the leaked syndromes.
    pub security_margin: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            n: 64,
            delta: 0.5,
            p_ctrl: 0.05,
            p_test: 0.05,
            seed: 1,
            security_margin: crate::postprocessing::DEFAULT_SECURITY_MARGIN,
        }
    }
}

impl ProtocolConfig {
    /// `N = ceil(8 n (1 + delta))`.
    pub fn num_rounds(&self) -> usize {
        let exact = 8.0 * self.n as f64 * (1.0 + self.delta);
        // absorb representation error so that e.g. 8 * 10 * 1.1 stays 88
        (exact - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 {
            return Err(ProtocolError::InvalidConfig("n must be positive".into()));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(ProtocolError::InvalidConfig(format!(
                "delta must be a nonnegative number, got {}",
                self.delta
            )));
        }
        for (name, p) in [("p_ctrl", self.p_ctrl), ("p_test", self.p_test)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ProtocolError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.num_rounds() > 50_000_000 {
            return Err(ProtocolError::InvalidConfig("too many rounds".into()));
        }
        Ok(())
    }
}

/// Independent random streams of one run, all derived from the seed.
///
/// `protocol` drives Alice's and Bob's choices and the public TEST/hash
/// randomness, `nature` supplies Born outcomes, `eve` is Eve's private coin.
pub struct RunRngs {
    pub protocol: ChaCha8Rng,
    pub nature: ChaCha8Rng,
    pub eve: ChaCha8Rng,
}

impl RunRngs {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        RunRngs {
            protocol: stream(0),
            nature: stream(1),
            eve: stream(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preparation {
    pub bit: u8,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BobAction {
    Sift,
    Ctrl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Sift,
    ZCtrl,
    XCtrl,
    Discard,
}

impl Classification {
    pub fn from_announcements(basis: Basis, action: BobAction) -> Self {
        match (basis, action) {
            (Basis::Z, BobAction::Sift) => Classification::Sift,
            (Basis::Z, BobAction::Ctrl) => Classification::ZCtrl,
            (Basis::X, BobAction::Ctrl) => Classification::XCtrl,
            (Basis::X, BobAction::Sift) => Classification::Discard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub index: usize,
    pub alice_basis: Basis,
    pub alice_bit: u8,
    pub bob_action: BobAction,
    /// Present iff Bob sifted.
    pub bob_bit: Option<u8>,
    /// Alice's measurement of the returned qubit in `alice_basis`. Absent only
    /// when no qubit came back.
    pub alice_return_bit: Option<u8>,
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassTally {
    pub count: usize,
    pub mismatches: usize,
    /// `None` when the class is empty.
    pub rate: Option<f64>,
}

impl ClassTally {
    pub fn new(count: usize, mismatches: usize) -> Self {
        ClassTally {
            count,
            mismatches,
            rate: (count > 0).then(|| mismatches as f64 / count as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRates {
    pub test: ClassTally,
    pub z_ctrl: ClassTally,
    pub x_ctrl: ClassTally,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub sift: usize,
    pub z_ctrl: usize,
    pub x_ctrl: usize,
    pub discard: usize,
}

impl ClassCounts {
    pub fn of(records: &[RoundRecord]) -> Self {
        records.iter().fold(ClassCounts::default(), |mut c, r| {
            match r.classification {
                Classification::Sift => c.sift += 1,
                Classification::ZCtrl => c.z_ctrl += 1,
                Classification::XCtrl => c.x_ctrl += 1,
                Classification::Discard => c.discard += 1,
            }
            c
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AbortReason {
    None,
    CtrlErrorHigh,
    TestErrorHigh,
    InsufficientBits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Full,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub protocol: ProtocolKind,
    pub attack: String,
    pub config: ProtocolConfig,
    pub num_rounds: usize,
    pub counts: ClassCounts,
    pub rates: ErrorRates,
    pub aborted: bool,
    pub abort_reason: AbortReason,
    pub test_indices: Vec<usize>,
    pub info_indices: Vec<usize>,
    #[serde(serialize_with = "crate::bits::serialize")]
    pub alice_info: Vec<u8>,
    #[serde(serialize_with = "crate::bits::serialize")]
    pub bob_info: Vec<u8>,
    /// Eve's guesses aligned with `info_indices`.
    #[serde(serialize_with = "crate::bits::serialize_opt")]
    pub eve_guesses: Option<Vec<u8>>,
    pub eve_accuracy: Option<f64>,
    /// Eve's guessing accuracy over every SIFT round, computed even when the
    /// run aborts.
    pub eve_sift_accuracy: Option<f64>,
    pub postprocessing: Option<PostprocessOutcome>,
    #[serde(serialize_with = "crate::bits::serialize_opt")]
    pub final_key_alice: Option<Vec<u8>>,
    #[serde(serialize_with = "crate::bits::serialize_opt")]
    pub final_key_bob: Option<Vec<u8>>,
    pub records: Vec<RoundRecord>,
}

impl RunReport {
    pub fn keys_match(&self) -> bool {
        matches!((&self.final_key_alice, &self.final_key_bob), (Some(a), Some(b)) if a == b)
    }
}

/// `N` independent uniform (bit, basis) pairs.
pub fn alice_prepare<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Vec<Preparation> {
    (0..config.num_rounds())
        .map(|_| Preparation {
            bit: rng.random_range(0..=1),
            basis: if rng.random_bool(0.5) { Basis::X } else { Basis::Z },
        })
        .collect()
}

pub fn bob_choose<R: Rng + ?Sized>(num_rounds: usize, rng: &mut R) -> Vec<BobAction> {
    (0..num_rounds)
        .map(|_| {
            if rng.random_bool(0.5) {
                BobAction::Sift
            } else {
                BobAction::Ctrl
            }
        })
        .collect()
}

/// Bob's classical operation on the qubit at `transmitted_qubit`: reflect it
/// untouched, or measure it in Z and resend exactly the collapsed state.
pub fn bob_act<R: Rng + ?Sized>(
    joint: &StateVector,
    transmitted_qubit: usize,
    action: BobAction,
    rng: &mut R,
) -> (StateVector, Option<u8>) {
    match action {
        BobAction::Ctrl => (joint.clone(), None),
        BobAction::Sift => {
            let (bit, post) = joint.measure(transmitted_qubit, Basis::Z, rng.random());
            (post, Some(bit))
        }
    }
}

/// One round of the full protocol: Alice's qubit with a fresh probe through
/// Eve's forward pass, Bob, Eve's optional probe measurement and backward
/// pass, and Alice's measurement in her own basis. Born outcomes come from
/// `nature`.
pub fn run_round<R: Rng + ?Sized>(
    index: usize,
    prep: Preparation,
    action: BobAction,
    attack: &AttackModel,
    nature: &mut R,
) -> (RoundRecord, EveNotes) {
    run_round_variant(index, prep, action, attack, Variant::Full, nature)
}

pub(crate) fn run_round_variant<R: Rng + ?Sized>(
    index: usize,
    prep: Preparation,
    action: BobAction,
    attack: &AttackModel,
    variant: Variant,
    nature: &mut R,
) -> (RoundRecord, EveNotes) {
    let plan = RoundPlan {
        action,
        variant,
        alice_basis: Some(prep.basis),
        eve_reads_held_probe: true,
    };
    let mut sim = Sampled::new(round::initial_state(attack, prep.bit, prep.basis), nature);
    round::propagate(&mut sim, attack, &plan);
    let c = sim.classical;
    let record = RoundRecord {
        index,
        alice_basis: prep.basis,
        alice_bit: prep.bit,
        bob_action: action,
        bob_bit: c.bob_bit,
        alice_return_bit: c.alice_return,
        classification: Classification::from_announcements(prep.basis, action),
    };
    (record, EveNotes { probe_outcomes: c.eve })
}

/// Classification from the two public announcements.
pub fn classify(records: &mut [RoundRecord]) {
    for r in records {
        r.classification = Classification::from_announcements(r.alice_basis, r.bob_action);
    }
}

fn tally(records: &[RoundRecord], class: Classification) -> ClassTally {
    let (count, mismatches) = records
        .iter()
        .filter(|r| r.classification == class)
        .fold((0, 0), |(c, m), r| {
            (c + 1, m + (r.alice_return_bit != Some(r.alice_bit)) as usize)
        });
    ClassTally::new(count, mismatches)
}

/// CTRL rates compare Alice's return measurement with what she sent; the
/// TEST rate compares Bob's published bit on `test_indices` with Alice's.
pub fn estimate_errors(records: &[RoundRecord], test_indices: &[usize]) -> ErrorRates {
    let test_mismatches = test_indices
        .iter()
        .filter(|&&i| records[i].bob_bit != Some(records[i].alice_bit))
        .count();
    ErrorRates {
        test: ClassTally::new(test_indices.len(), test_mismatches),
        z_ctrl: tally(records, Classification::ZCtrl),
        x_ctrl: tally(records, Classification::XCtrl),
    }
}

/// A uniform `n`-subset of the SIFT rounds becomes TEST (via
/// a seeded shuffle), then the first `n` remaining SIFT rounds in
/// transmission order become INFO. Both lists come back sorted.
pub fn select_test_info<R: Rng + ?Sized>(
    sift_indices: &[usize],
    n: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>), AbortReason> {
    if sift_indices.len() < 2 * n {
        return Err(AbortReason::InsufficientBits);
    }
    let mut shuffled = sift_indices.to_vec();
    shuffled.shuffle(rng);
    let mut test: Vec<usize> = shuffled[..n].to_vec();
    test.sort_unstable();
    let info: Vec<usize> = sift_indices
        .iter()
        .copied()
        .filter(|i| test.binary_search(i).is_err())
        .take(n)
        .collect();
    Ok((test, info))
}

pub fn run_protocol(config: &ProtocolConfig, attack: &AttackModel) -> Result<RunReport, ProtocolError> {
    execute(config, attack, Variant::Full)
}

fn exceeds(rate: Option<f64>, threshold: f64) -> bool {
    rate.is_some_and(|r| r > threshold)
}

pub(crate) fn execute(
    config: &ProtocolConfig,
    attack: &AttackModel,
    variant: Variant,
) -> Result<RunReport, ProtocolError> {
    config.validate()?;
    let mut rngs = RunRngs::new(config.seed);
    let num_rounds = config.num_rounds();

    let preps = alice_prepare(config, &mut rngs.protocol);
    let actions = bob_choose(num_rounds, &mut rngs.protocol);

    let (mut records, notes): (Vec<RoundRecord>, Vec<EveNotes>) = preps
        .iter()
        .zip(&actions)
        .enumerate()
        .map(|(i, (&prep, &action))| {
            run_round_variant(i, prep, action, attack, variant, &mut rngs.nature)
        })
        .unzip();

    classify(&mut records);
    let counts = ClassCounts::of(&records);
    let sift_indices: Vec<usize> = records
        .iter()
        .filter(|r| r.classification == Classification::Sift)
        .map(|r| r.index)
        .collect();

    // Eve hears which rounds are SIFT and commits to a guess for each.
    let sift_guesses = eve_guess_info(attack, &notes, &sift_indices, &mut rngs.eve);
    let eve_sift_accuracy = (!sift_indices.is_empty()).then(|| {
        let correct = sift_indices
            .iter()
            .zip(&sift_guesses)
            .filter(|(&i, &g)| records[i].alice_bit == g)
            .count();
        correct as f64 / sift_indices.len() as f64
    });

    let mut report = RunReport {
        protocol: match variant {
            Variant::Full => ProtocolKind::Full,
            Variant::Mock => ProtocolKind::Mock,
        },
        attack: attack.label().to_string(),
        config: config.clone(),
        num_rounds,
        counts,
        rates: estimate_errors(&records, &[]),
        aborted: true,
        abort_reason: AbortReason::None,
        test_indices: vec![],
        info_indices: vec![],
        alice_info: vec![],
        bob_info: vec![],
        eve_guesses: None,
        eve_accuracy: None,
        eve_sift_accuracy,
        postprocessing: None,
        final_key_alice: None,
        final_key_bob: None,
        records,
    };

    // CTRL check
    let rates = report.rates;
    if rates.z_ctrl.rate.is_none() || rates.x_ctrl.rate.is_none() {
        report.abort_reason = AbortReason::InsufficientBits;
        return Ok(report);
    }
    if exceeds(rates.z_ctrl.rate, config.p_ctrl) || exceeds(rates.x_ctrl.rate, config.p_ctrl) {
        report.abort_reason = AbortReason::CtrlErrorHigh;
        return Ok(report);
    }

    // TEST selection and check
    let (test, info) = match select_test_info(&sift_indices, config.n, &mut rngs.protocol) {
        Ok(sel) => sel,
        Err(reason) => {
            report.abort_reason = reason;
            return Ok(report);
        }
    };
    report.rates = estimate_errors(&report.records, &test);
    report.test_indices = test;
    if exceeds(report.rates.test.rate, config.p_test) {
        report.abort_reason = AbortReason::TestErrorHigh;
        return Ok(report);
    }

    // INFO string
    report.alice_info = info.iter().map(|&i| report.records[i].alice_bit).collect();
    report.bob_info = info
        .iter()
        .map(|&i| report.records[i].bob_bit.expect("SIFT rounds carry Bob's bit"))
        .collect();
    let guesses: Vec<u8> = info
        .iter()
        .map(|i| sift_guesses[sift_indices.binary_search(i).expect("INFO is a SIFT subset")])
        .collect();
    let correct = guesses
        .iter()
        .zip(&report.alice_info)
        .filter(|(g, a)| g == a)
        .count();
    report.eve_accuracy = Some(correct as f64 / info.len() as f64);
    report.eve_guesses = Some(guesses);
    report.info_indices = info;

    // reconciliation and privacy amplification
    let outcome = reconcile_and_amplify(
        &report.alice_info,
        &report.bob_info,
        &LinearCode::hamming74(),
        config.security_margin,
        &mut rngs.protocol,
    )
    .expect("INFO strings of equal length");
    report.final_key_alice = Some(outcome.final_key_alice.clone());
    report.final_key_bob = Some(outcome.final_key_bob.clone());
    report.postprocessing = Some(outcome);
    report.aborted = false;
    Ok(report)
}
