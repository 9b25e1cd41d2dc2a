use nalgebra::DMatrix;
use serde::Serialize;

use super::{log2_exact, Complex64, QuantumError, Result, StateVector, STATE_TOLERANCE};

/// Density operator on `log2(dim)` qubits, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        log2_exact(dim)?;
        if entries.len() != dim * dim {
            return Err(QuantumError::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        let rho = DensityMatrix { dim, entries };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_entries_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        DensityMatrix { dim, entries }
    }

    pub(crate) fn zeros(dim: usize) -> Self {
        DensityMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in amps {
            entries.extend(amps.iter().map(|b| a * b.conj()));
        }
        DensityMatrix { dim, entries }
    }

    /// `sum_k |k><k| (x) blocks[k]`: a classical register in front of a
    /// quantum system. Blocks may be subnormalized; the caller ensures the
    /// total trace is one.
    pub fn classical_quantum(blocks: &[DensityMatrix]) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| {
            QuantumError::InvalidDensity("classical-quantum state needs blocks".into())
        })?;
        let d = first.dim;
        let dim = d * blocks.len();
        log2_exact(dim)?;
        let mut out = DensityMatrix::zeros(dim);
        for (k, block) in blocks.iter().enumerate() {
            if block.dim != d {
                return Err(QuantumError::DimensionMismatch {
                    expected: d,
                    actual: block.dim,
                });
            }
            for r in 0..d {
                for c in 0..d {
                    out.entries[(k * d + r) * dim + k * d + c] = block.entries[r * d + c];
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn add_scaled(&mut self, weight: f64, other: &DensityMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * weight;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        for r in 0..d {
            for c in r..d {
                let dev = (self.entry(r, c) - self.entry(c, r).conj()).norm();
                if dev > STATE_TOLERANCE {
                    return Err(QuantumError::InvalidDensity(format!(
                        "not Hermitian at ({r},{c}): {dev:e}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -STATE_TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, state: &StateVector) -> f64 {
        let amps = state.amplitudes();
        assert_eq!(amps.len(), self.dim, "dimension mismatch");
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim {
            for c in 0..self.dim {
                acc += amps[r].conj() * self.entry(r, c) * amps[c];
            }
        }
        acc.re
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.to_matrix())
    }

    /// `(1/2) * sum |lambda_i(a - b)|`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let diff = self.to_matrix() - other.to_matrix();
        let half_norm: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>() / 2.0;
        half_norm.clamp(0.0, 1.0)
    }

    /// Optimal probability of identifying which of two equiprobable states was
    /// prepared.
    pub fn helstrom_success(&self, other: &DensityMatrix) -> f64 {
        0.5 + self.trace_distance(other) / 2.0
    }

    /// Root fidelity `Tr sqrt(sqrt(a) b sqrt(a))`; equals `|<a|b>|` for pure states.
    pub fn fidelity(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let a = self.to_matrix();
        let a = (a.adjoint() + a) * Complex64::new(0.5, 0.0);
        let eig = a.symmetric_eigen();
        let sqrt_vals = eig
            .eigenvalues
            .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
        let sqrt_a = &eig.eigenvectors
            * DMatrix::from_diagonal(&sqrt_vals)
            * eig.eigenvectors.adjoint();
        let inner = &sqrt_a * other.to_matrix() * &sqrt_a;
        hermitian_eigenvalues(&inner)
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m.adjoint() + m) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}
