use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    log2_exact, Complex64, QuantumError, Result, StateVector, MAX_QUBITS, STATE_TOLERANCE,
};

/// A unitary matrix on `log2(dim)` qubits, stored row-major.
///
/// Construction checks `U^dagger U = I` entrywise, so every value of this type
/// in the program is unitary to within [`STATE_TOLERANCE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUnitary", into = "RawUnitary")]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawUnitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl TryFrom<RawUnitary> for Unitary {
    type Error = QuantumError;

    fn try_from(raw: RawUnitary) -> Result<Self> {
        Unitary::new(raw.dim, raw.entries)
    }
}

impl From<Unitary> for RawUnitary {
    fn from(u: Unitary) -> Self {
        RawUnitary {
            dim: u.dim,
            entries: u.entries,
        }
    }
}

impl Unitary {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let qubits = log2_exact(dim)?;
        if qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(qubits));
        }
        if entries.len() != dim * dim {
            return Err(QuantumError::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        let u = Unitary { dim, entries };
        let deviation = u.unitarity_deviation();
        if deviation.is_nan() || deviation > STATE_TOLERANCE {
            return Err(QuantumError::NotUnitary(deviation));
        }
        Ok(u)
    }

    /// Builds from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    fn from_entries_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Unitary { dim, entries }
    }

    pub fn identity(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self::from_entries_unchecked(dim, entries)
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::from_entries_unchecked(
            2,
            [h, h, h, -h].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn pauli_x() -> Self {
        Self::from_entries_unchecked(
            2,
            [0.0, 1.0, 1.0, 0.0]
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        )
    }

    /// `R_y(angle) = [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]]`.
    pub fn ry(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self::from_entries_unchecked(
            2,
            [c, -s, s, c].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Two-qubit CNOT with the first qubit as control.
    pub fn cnot() -> Self {
        Self::controlled(&Self::pauli_x())
    }

    /// `|0><0| (x) I + |1><1| (x) u`, the control being the most significant qubit.
    pub fn controlled(u: &Unitary) -> Self {
        Self::block_diagonal(&Self::identity(u.num_qubits()), u)
            .expect("blocks share a dimension")
    }

    /// `|0><0| (x) a + |1><1| (x) b`.
    pub fn block_diagonal(a: &Unitary, b: &Unitary) -> Result<Self> {
        if a.dim != b.dim {
            return Err(QuantumError::DimensionMismatch {
                expected: a.dim,
                actual: b.dim,
            });
        }
        let d = a.dim;
        let dim = 2 * d;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..d {
            for c in 0..d {
                entries[r * dim + c] = a.entries[r * d + c];
                entries[(r + d) * dim + (c + d)] = b.entries[r * d + c];
            }
        }
        Ok(Self::from_entries_unchecked(dim, entries))
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Unitary) -> Self {
        let dim = self.dim * other.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for ar in 0..self.dim {
            for ac in 0..self.dim {
                let a = self.entries[ar * self.dim + ac];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for br in 0..other.dim {
                    for bc in 0..other.dim {
                        entries[(ar * other.dim + br) * dim + ac * other.dim + bc] =
                            a * other.entries[br * other.dim + bc];
                    }
                }
            }
        }
        Self::from_entries_unchecked(dim, entries)
    }

    /// Matrix product `self * rhs`: applying the result means `rhs` first.
    pub fn mul(&self, rhs: &Unitary) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Ok(Self::from_entries_unchecked(d, entries))
    }

    /// Applies `first`, then `then`, ... in order.
    pub fn sequence(ops: &[&Unitary]) -> Result<Self> {
        let (first, rest) = ops.split_first().expect("at least one operator");
        rest.iter()
            .try_fold((*first).clone(), |acc, next| next.mul(&acc))
    }

    /// Lifts `self` to `num_qubits` qubits, acting on `targets` (same
    /// ordering rules as [`StateVector::apply`]) and trivially elsewhere.
    pub fn embed(&self, targets: &[usize], num_qubits: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let image = StateVector::computational(num_qubits, col).apply(self, targets)?;
            for (row, z) in image.amplitudes().iter().enumerate() {
                entries[row * dim + col] = *z;
            }
        }
        Ok(Self::from_entries_unchecked(dim, entries))
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self::from_entries_unchecked(d, entries)
    }

    /// Haar-distributed unitary: Gram-Schmidt over the columns of a complex
    /// Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        let d = 1usize << num_qubits;
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        while cols.len() < d {
            let mut v: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            // two passes of modified Gram-Schmidt keep the columns orthogonal to ~1e-15
            for _ in 0..2 {
                for q in &cols {
                    let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for (c, col) in cols.iter().enumerate() {
            for (r, z) in col.iter().enumerate() {
                entries[r * d + c] = *z;
            }
        }
        Self::from_entries_unchecked(d, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Largest entrywise deviation of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entries[k * d + r].conj() * self.entries[k * d + c];
                }
                if r == c {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to another unitary of the same dimension.
    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_unitary() {
        let err = Unitary::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, QuantumError::NotUnitary(_)));
        assert!(matches!(
            Unitary::from_real(3, &[1.0; 9]),
            Err(QuantumError::NotPowerOfTwo(3))
        ));
        assert!(matches!(
            Unitary::from_real(2, &[1.0, 0.0, 0.0]),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cnot_truth_table() {
        let cnot = Unitary::cnot();
        // |10> -> |11>, |11> -> |10>
        assert_eq!(cnot.entry(3, 2), Complex64::new(1.0, 0.0));
        assert_eq!(cnot.entry(2, 3), Complex64::new(1.0, 0.0));
        assert_eq!(cnot.entry(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(cnot.entry(1, 1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn ry_at_pi_is_bit_flip_up_to_sign() {
        let r = Unitary::ry(std::f64::consts::PI);
        assert!((r.entry(1, 0).re - 1.0).abs() < 1e-15);
        assert!(r.entry(0, 0).norm() < 1e-15);
    }

    #[test]
    fn random_unitaries_pass_the_constructor_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in 1..=3 {
            let u = Unitary::random(q, &mut rng);
            assert!(u.unitarity_deviation() < 1e-12);
            assert!(Unitary::new(u.dim(), u.entries().to_vec()).is_ok());
        }
    }

    #[test]
    fn embed_matches_kron_and_reordering() {
        let h = Unitary::hadamard();
        let lifted = h.embed(&[0], 2).unwrap();
        assert!(lifted.max_abs_diff(&h.kron(&Unitary::identity(1))) < 1e-15);
        // CNOT with control 1, target 0, conjugated by H on both = CNOT(0 -> 1)
        let hh = h.kron(&h);
        let reversed = Unitary::cnot().embed(&[1, 0], 2).unwrap();
        let conj = Unitary::sequence(&[&hh, &reversed, &hh]).unwrap();
        assert!(conj.max_abs_diff(&Unitary::cnot()) < 1e-12);
    }

    #[test]
    fn sequence_applies_left_to_right() {
        let h = Unitary::hadamard();
        let x = Unitary::pauli_x();
        // H then X = X * H
        let seq = Unitary::sequence(&[&h, &x]).unwrap();
        assert!(seq.max_abs_diff(&x.mul(&h).unwrap()) < 1e-15);
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let u = Unitary::cnot();
        let json = serde_json::to_string(&u).unwrap();
        let back: Unitary = serde_json::from_str(&json).unwrap();
        assert_eq!(u, back);
        let bad = r#"{"dim":2,"entries":[[2.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<Unitary>(bad).is_err());
    }
}
