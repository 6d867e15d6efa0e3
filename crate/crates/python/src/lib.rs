//! Python bindings for `ineqprep`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ineqprep::amplification;
use ineqprep::arithmetic::{bits_for, FunctionTablePair, OracleData};
use ineqprep::prep::{self, AaRounds, Backend, GeneralPrepConfig, InversePrepConfig, PrepReport};
use ineqprep::resources::{self, CostModel};
use ineqprep::statevector::Statevector;
use ineqprep::PrepError;

fn to_py(err: PrepError) -> PyErr {
    if err.is_config_error() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

fn data_for(alphas: Vec<u64>, n: Option<usize>, zeros: bool) -> Result<OracleData, PrepError> {
    let n = n.unwrap_or_else(|| bits_for(alphas.iter().copied().max().unwrap_or(1)));
    if zeros {
        OracleData::with_zeros(alphas, n)
    } else {
        OracleData::new(alphas, n)
    }
}

fn options(aa: &str, backend: &str) -> Result<(AaRounds, Backend), PrepError> {
    Ok((aa.parse()?, backend.parse()?))
}

/// Result of one preparation run.
#[pyclass(name = "PrepReport", module = "ineqprep_py", frozen)]
struct PyPrepReport(PrepReport);

#[pymethods]
impl PyPrepReport {
    #[getter]
    fn post_selected_amplitudes(&self) -> Vec<f64> {
        self.0.post_selected_amplitudes.clone()
    }

    #[getter]
    fn success_probability_raw(&self) -> f64 {
        self.0.success_probability_raw
    }

    #[getter]
    fn aa_rounds_used(&self) -> usize {
        self.0.aa_rounds_used
    }

    #[getter]
    fn success_probability_final(&self) -> f64 {
        self.0.success_probability_final
    }

    #[getter]
    fn multiplication_count(&self) -> usize {
        self.0.multiplication_count
    }

    #[getter]
    fn fidelity_vs_target(&self) -> Option<f64> {
        self.0.fidelity_vs_target
    }

    #[getter]
    fn max_componentwise_error(&self) -> Option<f64> {
        self.0.max_componentwise_error
    }

    fn agrees_with(&self, other: &PyPrepReport, tol: f64) -> bool {
        prep::reports_agree(&self.0, &other.0, tol)
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("post_selected_amplitudes", self.post_selected_amplitudes())?;
        d.set_item("success_probability_raw", self.0.success_probability_raw)?;
        d.set_item("aa_rounds_used", self.0.aa_rounds_used)?;
        d.set_item("success_probability_final", self.0.success_probability_final)?;
        d.set_item("multiplication_count", self.0.multiplication_count)?;
        d.set_item("fidelity_vs_target", self.0.fidelity_vs_target)?;
        d.set_item("max_componentwise_error", self.0.max_componentwise_error)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.0.d()
    }

    fn __repr__(&self) -> String {
        format!(
            "PrepReport(d={}, p_raw={:.6}, rounds={}, p_final={:.6})",
            self.0.d(),
            self.0.success_probability_raw,
            self.0.aa_rounds_used,
            self.0.success_probability_final
        )
    }
}

/// Final state on the index register.
#[pyclass(name = "Statevector", module = "ineqprep_py", frozen)]
struct PyStatevector(Statevector);

#[pymethods]
impl PyStatevector {
    /// `(name, width)` pairs, low bits first.
    #[getter]
    fn registers(&self) -> Vec<(String, usize)> {
        self.0
            .layout()
            .registers()
            .iter()
            .map(|r| (r.name().to_owned(), r.width()))
            .collect()
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.layout().total_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn marginal(&self, register: &str) -> PyResult<Vec<f64>> {
        self.0.marginal(register).map_err(to_py)
    }

    fn probability(&self, conditions: Vec<(String, u64)>) -> PyResult<f64> {
        self.0.probability(&conditions).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Statevector(qubits={})", self.0.layout().total_qubits())
    }
}

type Prepared = (PyStatevector, PyPrepReport);

fn wrap((state, report): (Statevector, PrepReport)) -> Prepared {
    (PyStatevector(state), PyPrepReport(report))
}

/// Amplitudes proportional to `c / alpha_i`.
#[pyfunction]
#[pyo3(signature = (alphas, m, c = 1, n = None, aa = "auto", backend = "dense"))]
fn prepare_inverse(
    py: Python<'_>,
    alphas: Vec<u64>,
    m: usize,
    c: u64,
    n: Option<usize>,
    aa: &str,
    backend: &str,
) -> PyResult<Prepared> {
    let run = || {
        let (aa, backend) = options(aa, backend)?;
        let cfg = InversePrepConfig::inverse(data_for(alphas, n, false)?, c, m)?
            .with_aa(aa)
            .with_backend(backend);
        prep::prepare_inverse(&cfg)
    };
    py.detach(run).map(wrap).map_err(to_py)
}

/// Amplitudes proportional to `beta_i / alpha_i`.
#[pyfunction]
#[pyo3(signature = (alphas, betas, m, n = None, aa = "auto", backend = "dense"))]
fn prepare_division(
    py: Python<'_>,
    alphas: Vec<u64>,
    betas: Vec<u64>,
    m: usize,
    n: Option<usize>,
    aa: &str,
    backend: &str,
) -> PyResult<Prepared> {
    let run = || {
        let (aa, backend) = options(aa, backend)?;
        prep::prepare_division(&data_for(alphas, n, false)?, &betas, m, aa, backend)
    };
    py.detach(run).map(wrap).map_err(to_py)
}

/// Amplitudes proportional to a builtin `f(alpha_i)`: inv_sqrt_1p,
/// reciprocal or linear.
#[pyfunction]
#[pyo3(signature = (alphas, m, f_name = "inv_sqrt_1p", n = None, aa = "auto", backend = "block"))]
fn prepare_general(
    py: Python<'_>,
    alphas: Vec<u64>,
    m: usize,
    f_name: &str,
    n: Option<usize>,
    aa: &str,
    backend: &str,
) -> PyResult<Prepared> {
    let run = || {
        let (aa, backend) = options(aa, backend)?;
        let data = data_for(alphas, n, true)?;
        let tables = FunctionTablePair::builtin(f_name, data.n(), m)?;
        let cfg = GeneralPrepConfig::new(data, tables)?.with_aa(aa).with_backend(backend);
        prep::prepare_general(&cfg)
    };
    py.detach(run).map(wrap).map_err(to_py)
}

/// Equal superposition over `d` indices.
#[pyfunction]
fn prepare_uniform(py: Python<'_>, d: usize) -> PyResult<Prepared> {
    py.detach(|| prep::prepare_uniform(d)).map(wrap).map_err(to_py)
}

#[pyfunction]
fn counting_oracle_inverse(alpha: u64, c: u64, m: usize) -> PyResult<u64> {
    prep::counting_oracle_inverse(alpha, c, m).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (alpha, m, f_name = "inv_sqrt_1p", n = 4))]
fn counting_oracle_general(alpha: u64, m: usize, f_name: &str, n: usize) -> PyResult<u64> {
    let tables = FunctionTablePair::builtin(f_name, n, m).map_err(to_py)?;
    prep::counting_oracle_general(alpha, &tables).map_err(to_py)
}

#[pyfunction]
fn optimal_rounds(p: f64) -> PyResult<usize> {
    amplification::optimal_rounds(p).map_err(to_py)
}

#[pyfunction]
fn amplified_probability(p: f64, rounds: usize) -> f64 {
    amplification::amplified_probability(p, rounds)
}

fn cost_dict<'py>(py: Python<'py>, cost: CostModel) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("multiplications", cost.multiplications)?;
    d.set_item("extra_qubit_factor", cost.extra_qubit_factor)?;
    d.set_item("aa_rounds", cost.aa_rounds)?;
    Ok(d)
}

#[pyfunction]
fn cost_inequality_method(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    cost_dict(py, resources::cost_inequality_method())
}

#[pyfunction]
fn cost_newton_raphson(py: Python<'_>, epsilon: f64) -> PyResult<Bound<'_, PyDict>> {
    cost_dict(py, resources::cost_newton_raphson(epsilon).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (alphas, m, c = 1, n = None))]
fn aa_rounds_concrete(alphas: Vec<u64>, m: usize, c: u64, n: Option<usize>) -> PyResult<usize> {
    let data = data_for(alphas, n, false).map_err(to_py)?;
    resources::aa_rounds_concrete(&data, c, m).map_err(to_py)
}

/// `(p, bound)`: final probability with the rotation angle off by `eps0`
/// and the guaranteed lower bound.
#[pyfunction]
fn uniform_theta_perturbation(d: usize, eps0: f64) -> PyResult<(f64, f64)> {
    prep::uniform_theta_perturbation(d, eps0).map_err(to_py)
}

#[pymodule]
fn ineqprep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPrepReport>()?;
    m.add_class::<PyStatevector>()?;
    m.add_function(wrap_pyfunction!(prepare_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_division, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_general, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(counting_oracle_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(counting_oracle_general, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_rounds, m)?)?;
    m.add_function(wrap_pyfunction!(amplified_probability, m)?)?;
    m.add_function(wrap_pyfunction!(cost_inequality_method, m)?)?;
    m.add_function(wrap_pyfunction!(cost_newton_raphson, m)?)?;
    m.add_function(wrap_pyfunction!(aa_rounds_concrete, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_theta_perturbation, m)?)?;
    Ok(())
}
