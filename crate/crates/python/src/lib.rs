//! Python module `qmap`: states, region computations and the simulation
//! drivers of `qmap-core`. Reports come back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use qmap_core::cli::{self, StateSpec};
use qmap_core::protocols::{
    self, Budget, DecoderKind, Experiment, FamilyKind, SenderSizes, SimulationReport,
};
use qmap_core::qstate::{self, CMatrix, SystemLayout};
use qmap_core::regions::{self, RateTuple, SetFunction};

fn err(e: qmap_core::Error) -> PyErr {
    let msg = e.to_string();
    match cli::exit_code(&e) {
        cli::EXIT_BUDGET => PyMemoryError::new_err(msg),
        cli::EXIT_INVARIANT => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn family(name: &str) -> PyResult<FamilyKind> {
    match name {
        "haar" => Ok(FamilyKind::Haar),
        "pauli" => Ok(FamilyKind::Pauli),
        _ => Err(PyValueError::new_err(format!("unknown family `{name}` (haar, pauli)"))),
    }
}

fn decoder(name: &str) -> PyResult<DecoderKind> {
    match name {
        "sequential" => Ok(DecoderKind::Sequential),
        "joint-pgm" => Ok(DecoderKind::JointPgm),
        _ => Err(PyValueError::new_err(format!("unknown decoder `{name}` (sequential, joint-pgm)"))),
    }
}

fn budget(qubits: Option<u32>) -> PyResult<Budget> {
    match qubits {
        Some(q) => Ok(Budget::new(q)),
        None => cli::budget_from_env().map_err(err),
    }
}

/// Density matrix on labelled factors.
#[pyclass(name = "DensityMatrix", frozen, module = "qmap", skip_from_py_object)]
#[derive(Clone)]
pub struct PyDensityMatrix {
    inner: qstate::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// `matrix` is row-major complex; `layout` is `[(label, dim), ...]`.
    #[new]
    fn new(matrix: Vec<Vec<Complex64>>, layout: Vec<(String, usize)>) -> PyResult<Self> {
        let layout = SystemLayout::new(layout).map_err(err)?;
        let d = matrix.len();
        if matrix.iter().any(|row| row.len() != d) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let m = CMatrix::from_fn(d, d, |i, j| matrix[i][j]);
        Ok(Self {
            inner: qstate::DensityMatrix::new(m, layout).map_err(err)?,
        })
    }

    #[staticmethod]
    fn phi_plus(a: &str, b: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qstate::DensityMatrix::phi_plus(a, b).map_err(err)?,
        })
    }

    /// Ginibre random state of the given rank.
    #[staticmethod]
    fn random(layout: Vec<(String, usize)>, rank: usize, seed: u64) -> PyResult<Self> {
        let layout = SystemLayout::new(layout).map_err(err)?;
        Ok(Self {
            inner: qstate::random_density(layout, rank, seed).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn layout(&self) -> Vec<(String, usize)> {
        self.inner
            .layout()
            .factors()
            .iter()
            .map(|f| (f.label.clone(), f.dim))
            .collect()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.matrix();
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn partial_trace(&self, keep: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: qstate::partial_trace(&self.inner, &keep).map_err(err)?,
        })
    }

    fn tensor(&self, other: &PyDensityMatrix) -> PyResult<Self> {
        Ok(Self {
            inner: qstate::tensor(&self.inner, &other.inner).map_err(err)?,
        })
    }

    /// Entropy in bits of the whole state, or of the marginal on `labels`.
    #[pyo3(signature = (labels=None))]
    fn entropy(&self, labels: Option<Vec<String>>) -> PyResult<f64> {
        match labels {
            Some(l) => qstate::entropy_of(&self.inner, &l),
            None => qstate::entropy(&self.inner),
        }
        .map_err(err)
    }

    fn conditional_entropy(&self, a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
        qstate::conditional_entropy(&self.inner, &a, &b).map_err(err)
    }

    fn mutual_information(&self, a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
        qstate::mutual_information(&self.inner, &a, &b).map_err(err)
    }

    fn conditional_mutual_information(&self, a: Vec<String>, b: Vec<String>, c: Vec<String>) -> PyResult<f64> {
        qstate::conditional_mutual_information(&self.inner, &a, &b, &c).map_err(err)
    }

    fn trace_distance(&self, other: &PyDensityMatrix) -> PyResult<f64> {
        qstate::trace_distance(&self.inner, &other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        let labels: Vec<String> = self.layout().iter().map(|(l, d)| format!("{l}:{d}")).collect();
        format!("DensityMatrix([{}])", labels.join(", "))
    }
}

/// Parses a state spec (JSON text) into `(state, senders, b, e)`.
#[pyfunction]
fn load_spec(text: &str) -> PyResult<(PyDensityMatrix, Vec<String>, Vec<String>, Vec<String>)> {
    let spec: StateSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = spec.resolve().map_err(err)?;
    Ok((PyDensityMatrix { inner: r.rho }, r.senders, r.b, r.e))
}

fn table(f: &SetFunction) -> Vec<f64> {
    f.values().to_vec()
}

fn set_function(z: usize, values: Vec<f64>) -> PyResult<SetFunction> {
    SetFunction::from_table(z, values).map_err(err)
}

/// `Ĉ` as a table indexed by subset bitmask (sender 1 = bit 0).
#[pyfunction]
fn chat(rho: &PyDensityMatrix, senders: Vec<String>, v: Vec<String>) -> PyResult<Vec<f64>> {
    Ok(table(&regions::chat_from_state(&rho.inner, &senders, &v).map_err(err)?))
}

/// `D̂` as a bitmask-indexed table.
#[pyfunction]
fn dhat(rho: &PyDensityMatrix, senders: Vec<String>, w: Vec<String>) -> PyResult<Vec<f64>> {
    Ok(table(&regions::dhat_from_state(&rho.inner, &senders, &w).map_err(err)?))
}

/// `Ď` as a bitmask-indexed table.
#[pyfunction]
fn dcheck(rho: &PyDensityMatrix, senders: Vec<String>, w: Vec<String>) -> PyResult<Vec<f64>> {
    Ok(table(&regions::dcheck_from_state(&rho.inner, &senders, &w).map_err(err)?))
}

#[pyfunction]
fn main_region<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    senders: Vec<String>,
    b: Vec<String>,
    e: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let r = regions::main_region(&rho.inner, &senders, &b, &e).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (rho, senders, b, e, rates, slack=1e-9))]
fn check_rates<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    senders: Vec<String>,
    b: Vec<String>,
    e: Vec<String>,
    rates: Vec<f64>,
    slack: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = regions::main_region(&rho.inner, &senders, &b, &e).map_err(err)?;
    let rates = RateTuple::new(rates).map_err(err)?;
    to_py(py, &regions::membership(&r.region, &rates, slack).map_err(err)?)
}

/// `(C, D)` with `C − D = R` strictly between the two tables.
#[pyfunction]
fn rate_split(rates: Vec<f64>, chat: Vec<f64>, dhat: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let z = rates.len();
    let r = RateTuple::new(rates).map_err(err)?;
    let (c, d) = regions::rate_split(&r, &set_function(z, chat)?, &set_function(z, dhat)?).map_err(err)?;
    Ok((c.0, d.0))
}

#[pyfunction]
fn polymatroid_vertices(z: usize, table: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let v = regions::polymatroid_vertices(&set_function(z, table)?).map_err(err)?;
    Ok(v.into_iter().map(|r| r.0).collect())
}

#[pyfunction]
#[pyo3(signature = (z, table, log_dims=None))]
fn contrapolymatroid_vertices(z: usize, table: Vec<f64>, log_dims: Option<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let v = regions::contrapolymatroid_vertices(&set_function(z, table)?, log_dims.as_deref()).map_err(err)?;
    Ok(v.into_iter().map(|r| r.0).collect())
}

#[pyfunction]
#[pyo3(signature = (rho, n, delta, budget_qubits=None))]
fn typical_projector<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    n: usize,
    delta: f64,
    budget_qubits: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let t = protocols::typical_projector(&rho.inner, n, delta, budget(budget_qubits)?).map_err(err)?;
    to_py(py, &t.diagnostics)
}

fn experiment<'a>(
    rho: &'a PyDensityMatrix,
    senders: Vec<String>,
    n: usize,
    trials: usize,
    seed: u64,
    family_name: &str,
    budget_qubits: Option<u32>,
) -> PyResult<Experiment<'a>> {
    Ok(Experiment {
        rho: &rho.inner,
        senders,
        n,
        trials,
        master_seed: seed,
        family: family(family_name)?,
        budget: budget(budget_qubits)?,
    })
}

fn report<'py>(py: Python<'py>, r: qmap_core::Result<SimulationReport>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &r.map_err(err)?)
}

/// Distance of `⊗_z 𝓡_z(ρ^{⊗n})` from `π ⊗ (ρ^W)^{⊗n}` with `L_z` unitaries each.
#[pyfunction]
#[pyo3(signature = (rho, senders, l_sizes, seed, n=1, trials=1, family="haar", budget_qubits=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_randomization<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    senders: Vec<String>,
    l_sizes: Vec<usize>,
    seed: u64,
    n: usize,
    trials: usize,
    family: &str,
    budget_qubits: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let exp = experiment(rho, senders, n, trials, seed, family, budget_qubits)?;
    report(py, protocols::randomization_experiment(&exp, &l_sizes))
}

/// Decoding success of `K_z` random unitary encodings.
#[pyfunction]
#[pyo3(signature = (rho, senders, k_sizes, seed, n=1, trials=1, family="haar", decoder="sequential", budget_qubits=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_encoding<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    senders: Vec<String>,
    k_sizes: Vec<usize>,
    seed: u64,
    n: usize,
    trials: usize,
    family: &str,
    decoder: &str,
    budget_qubits: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let dec = self::decoder(decoder)?;
    let exp = experiment(rho, senders, n, trials, seed, family, budget_qubits)?;
    report(py, protocols::encoding_experiment(&exp, &k_sizes, dec))
}

/// Builds and evaluates codes with `M_z` messages and `L_z` randomizing
/// unitaries per sender.
#[pyfunction]
#[pyo3(signature = (rho, senders, e, m_sizes, l_sizes, seed, n=1, trials=1, family="haar", decoder="sequential", budget_qubits=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_code<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    senders: Vec<String>,
    e: Vec<String>,
    m_sizes: Vec<usize>,
    l_sizes: Vec<usize>,
    seed: u64,
    n: usize,
    trials: usize,
    family: &str,
    decoder: &str,
    budget_qubits: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    if m_sizes.len() != l_sizes.len() {
        return Err(PyValueError::new_err("m_sizes and l_sizes must have the same length"));
    }
    let sizes: Vec<SenderSizes> = m_sizes
        .iter()
        .zip(&l_sizes)
        .map(|(&messages, &randomizing)| SenderSizes { messages, randomizing })
        .collect();
    let dec = self::decoder(decoder)?;
    let exp = experiment(rho, senders, n, trials, seed, family, budget_qubits)?;
    report(py, protocols::code_experiment(&exp, &e, &sizes, dec))
}

/// Randomized property suites; the dict has `passed` and per-suite results.
#[pyfunction]
#[pyo3(signature = (seed, states=10, union_trials=200, inject_counterexample=false))]
fn verify_lemmas<'py>(
    py: Python<'py>,
    seed: u64,
    states: usize,
    union_trials: usize,
    inject_counterexample: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let options = cli::LemmaOptions {
        states,
        union_trials,
        inject_counterexample,
    };
    to_py(py, &cli::verify_lemmas(seed, options))
}

/// Runs the command-line front end in-process and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    cli::run_main(std::iter::once("qmap".to_string()).chain(args))
}

#[pymodule]
pub fn qmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_function(wrap_pyfunction!(load_spec, m)?)?;
    m.add_function(wrap_pyfunction!(chat, m)?)?;
    m.add_function(wrap_pyfunction!(dhat, m)?)?;
    m.add_function(wrap_pyfunction!(dcheck, m)?)?;
    m.add_function(wrap_pyfunction!(main_region, m)?)?;
    m.add_function(wrap_pyfunction!(check_rates, m)?)?;
    m.add_function(wrap_pyfunction!(rate_split, m)?)?;
    m.add_function(wrap_pyfunction!(polymatroid_vertices, m)?)?;
    m.add_function(wrap_pyfunction!(contrapolymatroid_vertices, m)?)?;
    m.add_function(wrap_pyfunction!(typical_projector, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_randomization, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_encoding, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_code, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemmas, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
