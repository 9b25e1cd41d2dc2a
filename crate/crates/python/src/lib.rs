//! Python bindings. Reports cross the boundary as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use sqkd_core::adversary::{build_attack, AttackModel, AttackSpec, MidPolicy};
use sqkd_core::quantum::{Complex64, DensityMatrix, Unitary};
use sqkd_core::{mock, protocol, robustness};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn square(rows: Vec<Vec<Complex64>>) -> PyResult<(usize, Vec<Complex64>)> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok((dim, rows.into_iter().flatten().collect()))
}

fn unitary(rows: Vec<Vec<Complex64>>) -> PyResult<Unitary> {
    let (dim, entries) = square(rows)?;
    Unitary::new(dim, entries).map_err(value_error)
}

fn density(rows: Vec<Vec<Complex64>>) -> PyResult<DensityMatrix> {
    let (dim, entries) = square(rows)?;
    DensityMatrix::new(dim, entries).map_err(value_error)
}

/// A per-round attack, built from the CLI grammar or from matrices.
#[pyclass(name = "Attack", frozen)]
struct PyAttack {
    model: AttackModel,
}

#[pymethods]
impl PyAttack {
    /// `none`, `measure-resend:z|x|random`, `cnot-probe[:mid]` or `rotation:<theta>`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let spec: AttackSpec = spec.parse().map_err(value_error)?;
        Ok(PyAttack {
            model: build_attack(&spec).map_err(value_error)?,
        })
    }

    /// Attack from forward and backward unitaries on the transmitted qubit
    /// (most significant) and the probe.
    #[staticmethod]
    #[pyo3(signature = (forward, backward, measure_mid=false))]
    fn custom(forward: Vec<Vec<Complex64>>, backward: Vec<Vec<Complex64>>, measure_mid: bool) -> PyResult<Self> {
        let spec = AttackSpec::CustomUnitary {
            forward: unitary(forward)?,
            backward: unitary(backward)?,
            mid_policy: if measure_mid { MidPolicy::MeasureProbeZ } else { MidPolicy::None },
        };
        Ok(PyAttack {
            model: build_attack(&spec).map_err(value_error)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.model.label().to_string()
    }

    #[getter]
    fn probe_qubits(&self) -> usize {
        self.model.probe_qubits()
    }

    fn __repr__(&self) -> String {
        format!("Attack('{}')", self.model.label())
    }
}

#[pyclass(name = "ProtocolConfig", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    n: usize,
    delta: f64,
    p_ctrl: f64,
    p_test: f64,
    seed: u64,
    security_margin: usize,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (n=64, delta=0.5, p_ctrl=0.05, p_test=0.05, seed=1, security_margin=16))]
    fn new(n: usize, delta: f64, p_ctrl: f64, p_test: f64, seed: u64, security_margin: usize) -> Self {
        PyConfig {
            n,
            delta,
            p_ctrl,
            p_test,
            seed,
            security_margin,
        }
    }

    fn num_rounds(&self) -> usize {
        self.core().num_rounds()
    }

    fn __repr__(&self) -> String {
        format!(
            "ProtocolConfig(n={}, delta={}, p_ctrl={}, p_test={}, seed={}, security_margin={})",
            self.n, self.delta, self.p_ctrl, self.p_test, self.seed, self.security_margin
        )
    }
}

impl PyConfig {
    fn core(&self) -> protocol::ProtocolConfig {
        protocol::ProtocolConfig {
            n: self.n,
            delta: self.delta,
            p_ctrl: self.p_ctrl,
            p_test: self.p_test,
            seed: self.seed,
            security_margin: self.security_margin,
        }
    }
}

/// Full protocol run; returns the report as a dict.
#[pyfunction]
fn run_protocol(py: Python<'_>, config: &PyConfig, attack: &PyAttack) -> PyResult<Py<PyAny>> {
    let report = protocol::run_protocol(&config.core(), &attack.model).map_err(value_error)?;
    to_py(py, &report)
}

#[pyfunction]
fn run_mock_protocol(py: Python<'_>, config: &PyConfig, attack: &PyAttack) -> PyResult<Py<PyAny>> {
    let report = mock::run_mock_protocol(&config.core(), &attack.model).map_err(value_error)?;
    to_py(py, &report)
}

/// Mock protocol vs full protocol under the CNOT probe, one dict per row.
#[pyfunction]
fn nonrobustness_demo(py: Python<'_>, config: &PyConfig) -> PyResult<Py<PyAny>> {
    let rows = mock::nonrobustness_demo(&config.core()).map_err(value_error)?;
    to_py(py, &rows)
}

/// Exact analysis of one attack: structure checks, detection probabilities
/// and Eve's distinguishability.
#[pyfunction]
fn analyze(py: Python<'_>, attack: &PyAttack) -> PyResult<Py<PyAny>> {
    to_py(py, &robustness::analyze(&attack.model).map_err(value_error)?)
}

#[pyfunction]
#[pyo3(signature = (attack, tol_disturb=1e-9, tol_info=1e-6))]
fn verify_theorem(py: Python<'_>, attack: &PyAttack, tol_disturb: f64, tol_info: f64) -> PyResult<Py<PyAny>> {
    let tol = robustness::Tolerances {
        disturbance: tol_disturb,
        info: tol_info,
    };
    to_py(py, &robustness::verify_theorem(&attack.model, tol).map_err(value_error)?)
}

/// Mismatch probability for `"test"`, `"z_ctrl"` or `"x_ctrl"` rounds.
#[pyfunction]
fn detection_probability(attack: &PyAttack, class: &str) -> PyResult<f64> {
    let class = match class {
        "test" => robustness::DetectionClass::Test,
        "z_ctrl" => robustness::DetectionClass::ZCtrl,
        "x_ctrl" => robustness::DetectionClass::XCtrl,
        other => return Err(PyValueError::new_err(format!("unknown class {other:?}"))),
    };
    Ok(robustness::exact_detection_probability(&attack.model, class))
}

/// `(ok, max_cross_term)` for a forward unitary on qubit (x) probe.
#[pyfunction]
fn check_forward_structure(forward: Vec<Vec<Complex64>>, probe_qubits: usize) -> PyResult<(bool, f64)> {
    robustness::check_forward_structure(&unitary(forward)?, probe_qubits).map_err(value_error)
}

/// `[(theta, disturbance, info_advantage)]` for the rotation-probe family.
#[pyfunction]
#[pyo3(signature = (grid=None, points=9))]
fn info_disturbance_sweep(grid: Option<Vec<f64>>, points: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    let grid = grid.unwrap_or_else(|| robustness::even_grid(points));
    let rows = robustness::info_disturbance_sweep(&grid).map_err(value_error)?;
    Ok(rows.into_iter().map(|r| (r.theta, r.disturbance, r.info_advantage)).collect())
}

#[pyfunction]
fn trace_distance(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let (a, b) = (density(rho)?, density(sigma)?);
    if a.dim() != b.dim() {
        return Err(PyValueError::new_err("density matrices differ in dimension"));
    }
    Ok(a.trace_distance(&b))
}

#[pymodule]
fn sqkd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAttack>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(run_mock_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(nonrobustness_demo, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(detection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(check_forward_structure, m)?)?;
    m.add_function(wrap_pyfunction!(info_disturbance_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    Ok(())
}
