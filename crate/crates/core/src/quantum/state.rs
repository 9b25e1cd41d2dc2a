use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use super::{
    bit_position, log2_exact, validate_targets, Basis, Complex64, DensityMatrix, QuantumError,
    Result, Unitary, MAX_QUBITS, STATE_TOLERANCE,
};

/// Branches whose Born weight falls below this are treated as impossible.
const NEGLIGIBLE_PROBABILITY: f64 = 1e-24;

/// Normalized pure state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        Self::computational(num_qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn computational(num_qubits: usize, index: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&num_qubits),
            "qubit count {num_qubits} out of range"
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = log2_exact(amplitudes.len())?;
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(num_qubits));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// `|0>`, `|1>`, `|+>` or `|->`.
    pub fn basis_state(bit: u8, basis: Basis) -> Self {
        let s = FRAC_1_SQRT_2;
        let amps = match (basis, bit) {
            (Basis::Z, 0) => [1.0, 0.0],
            (Basis::Z, _) => [0.0, 1.0],
            (Basis::X, 0) => [s, s],
            (Basis::X, _) => [s, -s],
        };
        StateVector {
            num_qubits: 1,
            amplitudes: amps.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Kronecker product; `self` supplies the more significant qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let num_qubits = self.num_qubits + other.num_qubits;
        assert!(num_qubits <= MAX_QUBITS, "joint state too large");
        let mut amplitudes = Vec::with_capacity(1 << num_qubits);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    /// Applies `u` to `targets` (in order: `targets[0]` is the most significant
    /// qubit of `u`) and the identity elsewhere.
    pub fn apply(&self, u: &Unitary, targets: &[usize]) -> Result<StateVector> {
        validate_targets(targets, self.num_qubits)?;
        let k = targets.len();
        if u.dim() != 1 << k {
            return Err(QuantumError::DimensionMismatch {
                expected: 1 << k,
                actual: u.dim(),
            });
        }
        let n = self.num_qubits;
        let positions: Vec<usize> = targets.iter().map(|&t| bit_position(t, n)).collect();
        let mask = positions.iter().fold(0usize, |m, &p| m | (1 << p));
        let local_dim = 1usize << k;
        // offsets[l] = global index bits contributed by local index l
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| {
                positions.iter().enumerate().fold(0, |acc, (j, &p)| {
                    if (l >> (k - 1 - j)) & 1 == 1 {
                        acc | (1 << p)
                    } else {
                        acc
                    }
                })
            })
            .collect();

        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut local = vec![Complex64::new(0.0, 0.0); local_dim];
        for base in (0..self.amplitudes.len()).filter(|i| i & mask == 0) {
            for (l, off) in offsets.iter().enumerate() {
                local[l] = self.amplitudes[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, amp) in local.iter().enumerate() {
                    acc += u.entry(r, c) * amp;
                }
                out[base | off] = acc;
            }
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes: out,
        })
    }

    /// Applies `u` to the whole register.
    pub fn apply_all(&self, u: &Unitary) -> Result<StateVector> {
        let targets: Vec<usize> = (0..self.num_qubits).collect();
        self.apply(u, &targets)
    }

    /// Born probability that `qubit` reads 0 in `basis`.
    pub fn probability_zero(&self, qubit: usize, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.z_probability_zero(qubit),
            Basis::X => self
                .apply(&Unitary::hadamard(), &[qubit])
                .expect("qubit index checked by caller")
                .z_probability_zero(qubit),
        }
    }

    fn z_probability_zero(&self, qubit: usize) -> f64 {
        assert!(qubit < self.num_qubits, "qubit {qubit} out of range");
        let bit = 1 << bit_position(qubit, self.num_qubits);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `qubit` onto outcome `bit` of `basis`.
    ///
    /// Returns the Born probability and the renormalized post-measurement
    /// state, or `None` when the outcome has (numerically) zero probability.
    pub fn project(&self, qubit: usize, basis: Basis, bit: u8) -> Option<(f64, StateVector)> {
        match basis {
            Basis::Z => self.project_z(qubit, bit),
            Basis::X => {
                let h = Unitary::hadamard();
                let rotated = self.apply(&h, &[qubit]).expect("qubit index in range");
                rotated.project_z(qubit, bit).map(|(p, s)| {
                    (p, s.apply(&h, &[qubit]).expect("qubit index in range"))
                })
            }
        }
    }

    fn project_z(&self, qubit: usize, bit: u8) -> Option<(f64, StateVector)> {
        assert!(qubit < self.num_qubits, "qubit {qubit} out of range");
        let mask = 1 << bit_position(qubit, self.num_qubits);
        let keep = |i: usize| ((i & mask != 0) as u8) == bit;
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p < NEGLIGIBLE_PROBABILITY {
            return None;
        }
        let scale = 1.0 / p.sqrt();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if keep(i) { a * scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        Some((
            p.min(1.0),
            StateVector {
                num_qubits: self.num_qubits,
                amplitudes,
            },
        ))
    }

    /// Measures `qubit` in `basis`. Outcome 0 is selected iff
    /// `randomness < P(0)`, so the result is a pure function of its inputs.
    pub fn measure(&self, qubit: usize, basis: Basis, randomness: f64) -> (u8, StateVector) {
        let p0 = self.probability_zero(qubit, basis);
        let bit = if randomness < p0 { 0 } else { 1 };
        match self.project(qubit, basis, bit) {
            Some((_, collapsed)) => (bit, collapsed),
            // the chosen outcome carried less than NEGLIGIBLE_PROBABILITY
            None => {
                let (_, collapsed) = self
                    .project(qubit, basis, 1 - bit)
                    .expect("one outcome always has support");
                (1 - bit, collapsed)
            }
        }
    }

    /// Reduced density matrix on `keep` (in the listed order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(QuantumError::InvalidTargets {
                targets: vec![],
                num_qubits: self.num_qubits,
            });
        }
        validate_targets(keep, self.num_qubits)?;
        let n = self.num_qubits;
        let k = keep.len();
        let keep_positions: Vec<usize> = keep.iter().map(|&q| bit_position(q, n)).collect();
        let keep_mask = keep_positions.iter().fold(0usize, |m, &p| m | (1 << p));
        let kdim = 1usize << k;
        let offsets: Vec<usize> = (0..kdim)
            .map(|l| {
                keep_positions.iter().enumerate().fold(0, |acc, (j, &p)| {
                    if (l >> (k - 1 - j)) & 1 == 1 {
                        acc | (1 << p)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let mut rho = vec![Complex64::new(0.0, 0.0); kdim * kdim];
        for rest in (0..self.amplitudes.len()).filter(|i| i & keep_mask == 0) {
            for (a, oa) in offsets.iter().enumerate() {
                let amp_a = self.amplitudes[rest | oa];
                if amp_a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (b, ob) in offsets.iter().enumerate() {
                    rho[a * kdim + b] += amp_a * self.amplitudes[rest | ob].conj();
                }
            }
        }
        Ok(DensityMatrix::from_entries_unchecked(kdim, rho))
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Complex64 {
        assert_eq!(
            self.num_qubits, other.num_qubits,
            "overlap needs equal qubit counts"
        );
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest amplitudewise distance.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_amps(state: &StateVector, expected: &[f64]) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - c(*e)).norm() < EPS, "{:?} vs {:?}", state.amplitudes(), expected);
        }
    }

    #[test]
    fn basis_states() {
        let s = FRAC_1_SQRT_2;
        assert_amps(&StateVector::basis_state(0, Basis::Z), &[1.0, 0.0]);
        assert_amps(&StateVector::basis_state(1, Basis::Z), &[0.0, 1.0]);
        assert_amps(&StateVector::basis_state(0, Basis::X), &[s, s]);
        assert_amps(&StateVector::basis_state(1, Basis::X), &[s, -s]);
    }

    #[test]
    fn tensor_products() {
        let s = FRAC_1_SQRT_2;
        let zero = StateVector::basis_state(0, Basis::Z);
        let one = StateVector::basis_state(1, Basis::Z);
        let plus = StateVector::basis_state(0, Basis::X);
        assert_amps(&zero.tensor(&one), &[0.0, 1.0, 0.0, 0.0]);
        assert_amps(&plus.tensor(&zero), &[s, 0.0, s, 0.0]);
        assert_amps(&one.tensor(&one), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn apply_examples() {
        let s = FRAC_1_SQRT_2;
        let zero = StateVector::basis_state(0, Basis::Z);
        let h0 = zero.apply(&Unitary::hadamard(), &[0]).unwrap();
        assert_amps(&h0, &[s, s]);

        let ten = StateVector::computational(2, 0b10);
        let out = ten.apply(&Unitary::cnot(), &[0, 1]).unwrap();
        assert_amps(&out, &[0.0, 0.0, 0.0, 1.0]);

        let bell = StateVector::basis_state(0, Basis::X)
            .tensor(&zero)
            .apply(&Unitary::cnot(), &[0, 1])
            .unwrap();
        assert_amps(&bell, &[s, 0.0, 0.0, s]);
    }

    #[test]
    fn apply_respects_target_order() {
        // control on qubit 1, target qubit 0: |01> -> |11>
        let out = StateVector::computational(2, 0b01)
            .apply(&Unitary::cnot(), &[1, 0])
            .unwrap();
        assert_amps(&out, &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn apply_rejects_bad_targets() {
        let s = StateVector::zero(2);
        assert!(matches!(
            s.apply(&Unitary::cnot(), &[0, 0]),
            Err(QuantumError::InvalidTargets { .. })
        ));
        assert!(matches!(
            s.apply(&Unitary::cnot(), &[0, 2]),
            Err(QuantumError::InvalidTargets { .. })
        ));
        assert!(matches!(
            s.apply(&Unitary::cnot(), &[0]),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn measure_examples() {
        let one = StateVector::basis_state(1, Basis::Z);
        for r in [0.0, 0.5, 0.999] {
            let (bit, post) = one.measure(0, Basis::Z, r);
            assert_eq!(bit, 1);
            assert_amps(&post, &[0.0, 1.0]);
        }
        let plus = StateVector::basis_state(0, Basis::X);
        let (bit, post) = plus.measure(0, Basis::Z, 0.3);
        assert_eq!(bit, 0);
        assert_amps(&post, &[1.0, 0.0]);
        for r in [0.0, 0.7, 0.9999] {
            let (bit, post) = plus.measure(0, Basis::X, r);
            assert_eq!(bit, 0);
            assert!(post.max_abs_diff(&plus) < EPS);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let s = FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let rho = bell.partial_trace(&[0]).unwrap();
        assert!((rho.entry(0, 0) - c(0.5)).norm() < EPS);
        assert!((rho.entry(1, 1) - c(0.5)).norm() < EPS);
        assert!(rho.entry(0, 1).norm() < EPS);

        let plus = StateVector::basis_state(0, Basis::X);
        let prod = plus.tensor(&StateVector::basis_state(1, Basis::Z));
        let rho = prod.partial_trace(&[0]).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert!((rho.entry(r, col) - c(0.5)).norm() < EPS);
            }
        }

        let rho = bell.partial_trace(&[0, 1]).unwrap();
        let pure = DensityMatrix::from_pure(&bell);
        assert!(rho.max_abs_diff(&pure) < EPS);
        assert!(bell.partial_trace(&[]).is_err());
    }

    #[test]
    fn overlap_examples() {
        let zero = StateVector::basis_state(0, Basis::Z);
        let one = StateVector::basis_state(1, Basis::Z);
        let plus = StateVector::basis_state(0, Basis::X);
        assert!((zero.overlap(&zero) - c(1.0)).norm() < EPS);
        assert!(zero.overlap(&one).norm() < EPS);
        assert!((zero.overlap(&plus) - c(FRAC_1_SQRT_2)).norm() < EPS);
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0), c(1.0)]),
            Err(QuantumError::NotNormalized(_))
        ));
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0), c(0.0), c(0.0)]),
            Err(QuantumError::NotPowerOfTwo(3))
        ));
    }

    fn arb_state(max_qubits: usize) -> impl Strategy<Value = StateVector> {
        (1..=max_qubits).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
                "nonzero vector",
                |raw| {
                    let norm = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
                    (norm > 1e-3).then(|| {
                        StateVector::from_amplitudes(
                            raw.iter()
                                .map(|(a, b)| Complex64::new(a / norm, b / norm))
                                .collect(),
                        )
                        .unwrap()
                    })
                },
            )
        })
    }

    fn arb_basis() -> impl Strategy<Value = Basis> {
        prop_oneof![Just(Basis::Z), Just(Basis::X)]
    }

    proptest! {
        #[test]
        fn norm_preserved_under_random_unitaries(state in arb_state(4), seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = 1 + (seed as usize % state.num_qubits());
            let u = Unitary::random(k, &mut rng);
            let targets: Vec<usize> = (0..k).rev().collect();
            let out = state.apply(&u, &targets).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < STATE_TOLERANCE);
        }

        #[test]
        fn measurement_is_complete(state in arb_state(4), q in 0usize..4, basis in arb_basis()) {
            let q = q % state.num_qubits();
            let p0 = state.probability_zero(q, basis);
            let p1 = state.project(q, basis, 1).map_or(0.0, |(p, _)| p);
            prop_assert!((p0 + p1 - 1.0).abs() < STATE_TOLERANCE);
        }

        #[test]
        fn collapse_is_idempotent(
            state in arb_state(3),
            q in 0usize..3,
            basis in arb_basis(),
            r1 in 0.0f64..1.0,
            r2 in 0.0f64..1.0,
        ) {
            let q = q % state.num_qubits();
            let (b1, post) = state.measure(q, basis, r1);
            let (b2, again) = post.measure(q, basis, r2);
            prop_assert_eq!(b1, b2);
            prop_assert!((post.norm_sqr() - 1.0).abs() < STATE_TOLERANCE);
            prop_assert!(again.max_abs_diff(&post) < 1e-9);
        }

        #[test]
        fn hadamard_is_an_involution(state in arb_state(4), q in 0usize..4) {
            let q = q % state.num_qubits();
            let h = Unitary::hadamard();
            let twice = state.apply(&h, &[q]).unwrap().apply(&h, &[q]).unwrap();
            prop_assert!(twice.max_abs_diff(&state) < STATE_TOLERANCE);
        }

        #[test]
        fn partial_trace_of_product_recovers_factor(a in arb_state(2), b in arb_state(2)) {
            let joint = a.tensor(&b);
            let keep: Vec<usize> = (0..a.num_qubits()).collect();
            let rho = joint.partial_trace(&keep).unwrap();
            prop_assert!((rho.fidelity_with_pure(&a) - 1.0).abs() < STATE_TOLERANCE);
            let keep_b: Vec<usize> = (a.num_qubits()..joint.num_qubits()).collect();
            let rho_b = joint.partial_trace(&keep_b).unwrap();
            prop_assert!((rho_b.fidelity_with_pure(&b) - 1.0).abs() < STATE_TOLERANCE);
            prop_assert!((rho.trace().re - 1.0).abs() < STATE_TOLERANCE);
        }
    }
}
