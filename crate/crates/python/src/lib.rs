//! Python bindings for the diagdec library.
//!
//! Matrices cross the boundary as lists of rows of Python `complex` numbers.

use std::collections::BTreeMap;

use diagdec::apps::{self, ThermalDims, ThermalParams};
use diagdec::cli;
use diagdec::decoupling::{self as dec, BoundKind, BoundParams, Ensemble};
use diagdec::entropy::{self, Cut, H2Mode};
use diagdec::linalg::{self, ComplexMatrix};
use diagdec::random::{self, Basis, RngSpec};
use diagdec::sdp;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(diagdec_py, DiagdecError, PyException);

type Rows = Vec<Vec<Complex64>>;

fn py_err(e: diagdec::Error) -> PyErr {
    DiagdecError::new_err(e.to_string())
}

fn to_matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(DiagdecError::new_err("rows have different lengths"));
    }
    ComplexMatrix::new(n_rows, n_cols, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn basis(name: &str) -> PyResult<Basis> {
    match name {
        "Z" | "z" => Ok(Basis::Z),
        "X" | "x" => Ok(Basis::X),
        _ => Err(DiagdecError::new_err(format!("basis must be 'Z' or 'X', got {name:?}"))),
    }
}

/// A density operator with its subsystem dimensions.
#[pyclass(name = "QuantumState", module = "diagdec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyQuantumState {
    inner: linalg::QuantumState,
}

#[pymethods]
impl PyQuantumState {
    #[new]
    fn new(matrix: Rows, dims: Vec<usize>) -> PyResult<Self> {
        let inner = linalg::QuantumState::normalized(to_matrix(matrix)?, dims).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn maximally_mixed(dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: linalg::QuantumState::maximally_mixed(dims).map_err(py_err)? })
    }

    #[staticmethod]
    fn max_entangled(d: usize) -> Self {
        Self { inner: linalg::max_entangled(d) }
    }

    #[staticmethod]
    #[pyo3(signature = (dims, seed, stream = 0))]
    fn random_pure(dims: Vec<usize>, seed: u64, stream: u64) -> PyResult<Self> {
        let inner = random::sample_pure_state(dims, RngSpec::new(seed, stream)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (dims, rank, seed, stream = 0))]
    fn random_mixed(dims: Vec<usize>, rank: usize, seed: u64, stream: u64) -> PyResult<Self> {
        let inner = random::sample_mixed_state(dims, rank, RngSpec::new(seed, stream)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn matrix(&self) -> Rows {
        to_rows(self.inner.matrix())
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn marginal(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.marginal(&keep).map_err(py_err)? })
    }

    fn tensor(&self, other: &Self) -> Self {
        Self { inner: self.inner.tensor(&other.inner) }
    }

    fn __repr__(&self) -> String {
        format!("QuantumState(dims={:?}, purity={:.6})", self.inner.dims(), self.inner.purity())
    }
}

/// A linear map stored through its normalized Choi matrix.
#[pyclass(name = "Channel", module = "diagdec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChannel {
    inner: linalg::Channel,
}

#[pymethods]
impl PyChannel {
    #[staticmethod]
    fn identity(d: usize) -> Self {
        Self { inner: linalg::Channel::identity(d) }
    }

    #[staticmethod]
    fn partial_trace(d_keep: usize, d_traced: usize) -> Self {
        Self { inner: linalg::Channel::partial_trace(d_keep, d_traced) }
    }

    #[staticmethod]
    fn full_trace(d: usize) -> Self {
        Self { inner: linalg::Channel::full_trace(d) }
    }

    #[staticmethod]
    fn depolarizing(d: usize, p: f64) -> PyResult<Self> {
        Ok(Self { inner: linalg::Channel::depolarizing(d, p).map_err(py_err)? })
    }

    #[staticmethod]
    fn unitary(u: Rows) -> PyResult<Self> {
        Ok(Self { inner: linalg::Channel::unitary(&to_matrix(u)?).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_kraus(ops: Vec<Rows>) -> PyResult<Self> {
        let ops = ops.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        let inner = linalg::j_map(&linalg::ChannelDescription::Kraus(ops)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn d_in(&self) -> usize {
        self.inner.d_in()
    }

    #[getter]
    fn d_out(&self) -> usize {
        self.inner.d_out()
    }

    fn choi(&self) -> Rows {
        to_rows(self.inner.choi())
    }

    fn apply(&self, x: Rows) -> PyResult<Rows> {
        Ok(to_rows(&self.inner.apply(&to_matrix(x)?).map_err(py_err)?))
    }

    fn is_trace_preserving(&self) -> bool {
        self.inner.is_trace_preserving()
    }
}

/// One realization of the alternating diagonal circuit.
#[pyclass(name = "DiagCircuit", module = "diagdec_py", frozen)]
struct PyDiagCircuit {
    inner: random::DiagCircuit,
}

#[pymethods]
impl PyDiagCircuit {
    #[staticmethod]
    #[pyo3(signature = (n_qubits, ell, seed, stream = 0))]
    fn sample(n_qubits: usize, ell: usize, seed: u64, stream: u64) -> PyResult<Self> {
        let inner = random::sample_d_ell(n_qubits, ell, RngSpec::new(seed, stream)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: random::DiagCircuit::from_text(text).map_err(py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Rows {
        to_rows(&self.inner.matrix())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

/// State, channel and ensemble of a decoupling experiment.
#[pyclass(name = "DecouplingInstance", module = "diagdec_py", frozen)]
struct PyDecouplingInstance {
    inner: dec::DecouplingInstance,
}

#[pymethods]
impl PyDecouplingInstance {
    #[new]
    #[pyo3(signature = (state, channel, ensemble, samples, seed, stream = 1))]
    fn new(
        state: &PyQuantumState,
        channel: &PyChannel,
        ensemble: &str,
        samples: usize,
        seed: u64,
        stream: u64,
    ) -> PyResult<Self> {
        let ensemble: Ensemble = ensemble.parse().map_err(py_err)?;
        let inner = dec::DecouplingInstance::new(
            state.inner.clone(),
            channel.inner.clone(),
            ensemble,
            samples,
            RngSpec::new(seed, stream),
        )
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn ensemble(&self) -> String {
        self.inner.ensemble.to_string()
    }

    #[getter]
    fn d_a(&self) -> usize {
        self.inner.d_a()
    }

    fn error_of_unitary(&self, u: Rows) -> PyResult<f64> {
        dec::error_of_unitary(&self.inner, &to_matrix(u)?).map_err(py_err)
    }

    /// Monte-Carlo report as a dictionary; releases the GIL while sampling.
    fn mc_decoupling<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = py.detach(|| dec::mc_decoupling(&self.inner)).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("ensemble", r.ensemble.to_string())?;
        d.set_item("samples", r.samples)?;
        d.set_item("mean_error", r.mean_error)?;
        d.set_item("std_error", r.std_error)?;
        d.set_item("mean_square", r.mean_square)?;
        d.set_item("exact_square_bound", r.exact_square_bound)?;
        d.set_item("propagated_square_error", r.propagated_square_error())?;
        d.set_item("bounds", r.bound_values)?;
        d.set_item("lambda_rate", r.lambda_rate)?;
        Ok(d)
    }

    #[pyo3(signature = (ell, sigma_b = None, sigma_r = None))]
    fn exact_square_bound(&self, ell: usize, sigma_b: Option<Rows>, sigma_r: Option<Rows>) -> PyResult<f64> {
        let sb = sigma_b.map(to_matrix).transpose()?;
        let sr = sigma_r.map(to_matrix).transpose()?;
        dec::exact_square_bound(&self.inner, ell, sb.as_ref(), sr.as_ref()).map_err(py_err)
    }

    /// `(H₂(A|R), H₂(A|B))` with optimized conditioning states.
    fn collision_entropies(&self) -> PyResult<(f64, f64)> {
        let h = self.inner.collision_entropies().map_err(py_err)?;
        Ok((h.h2_ar, h.h2_ab))
    }

    fn min_entropies(&self) -> PyResult<(f64, f64)> {
        let h = self.inner.min_entropies().map_err(py_err)?;
        Ok((h.hmin_ar, h.hmin_ab))
    }
}

#[pyfunction]
fn kron(a: Rows, b: Rows) -> PyResult<Rows> {
    Ok(to_rows(&to_matrix(a)?.kron(&to_matrix(b)?)))
}

#[pyfunction]
fn partial_trace(m: Rows, dims: Vec<usize>, traced: Vec<usize>) -> PyResult<Rows> {
    Ok(to_rows(&linalg::partial_trace(&to_matrix(m)?, &dims, &traced).map_err(py_err)?))
}

#[pyfunction]
fn trace_norm(m: Rows) -> PyResult<f64> {
    Ok(linalg::trace_norm(&to_matrix(m)?))
}

#[pyfunction]
fn swap_operator(d: usize) -> Rows {
    to_rows(&linalg::swap_operator(d))
}

#[pyfunction]
#[pyo3(signature = (d, seed, stream = 0))]
fn sample_haar(d: usize, seed: u64, stream: u64) -> PyResult<Rows> {
    Ok(to_rows(&random::sample_haar(d, RngSpec::new(seed, stream)).map_err(py_err)?))
}

#[pyfunction]
fn twirl2_diag(x: Rows, basis_name: &str) -> PyResult<Rows> {
    Ok(to_rows(&random::twirl2_diag(&to_matrix(x)?, basis(basis_name)?).map_err(py_err)?))
}

#[pyfunction]
fn twirl2_haar(x: Rows) -> PyResult<Rows> {
    Ok(to_rows(&random::twirl2_haar(&to_matrix(x)?).map_err(py_err)?))
}

#[pyfunction]
fn p_ell(d: usize, ell: usize) -> f64 {
    random::p_ell(d, ell)
}

#[pyfunction]
fn lemma5_decompose(py: Python<'_>, n_qubits: usize, ell: usize) -> PyResult<Bound<'_, PyDict>> {
    let dec = random::lemma5_decompose(n_qubits, ell).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("p_ell", dec.p_ell)?;
    d.set_item("p_ell_exact", (dec.p_ell_exact.num, dec.p_ell_exact.den))?;
    d.set_item("min_choi_eigenvalue", dec.report.min_choi_eigenvalue)?;
    d.set_item("tp_residual", dec.report.tp_residual)?;
    d.set_item("unital_residual", dec.report.unital_residual)?;
    d.set_item("decomposition_residual", dec.report.decomposition_residual)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (delta_choi, d_in, d_out, gap_tol = 1e-8))]
fn diamond_norm(py: Python<'_>, delta_choi: Rows, d_in: usize, d_out: usize, gap_tol: f64) -> PyResult<f64> {
    let m = to_matrix(delta_choi)?;
    py.detach(|| sdp::diamond_norm(&m, d_in, d_out, gap_tol)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n_qubits, ell, gap_tol = 1e-7))]
fn design_distance(py: Python<'_>, n_qubits: usize, ell: usize, gap_tol: f64) -> PyResult<f64> {
    py.detach(|| cli::design_distance(n_qubits, ell, gap_tol)).map_err(py_err)
}

fn cut_of(a: Vec<usize>, b: Vec<usize>) -> PyResult<Cut> {
    Cut::new(a, b).map_err(py_err)
}

#[pyfunction]
fn h_min_cond(state: &PyQuantumState, a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    Ok(entropy::h_min_cond(&state.inner, &cut_of(a, b)?).map_err(py_err)?.value)
}

#[pyfunction]
#[pyo3(signature = (state, a, b, mode = "optimized"))]
fn h_2_cond(state: &PyQuantumState, a: Vec<usize>, b: Vec<usize>, mode: &str) -> PyResult<f64> {
    let mode: H2Mode = mode.parse().map_err(py_err)?;
    Ok(entropy::h_2_cond(&state.inner, &cut_of(a, b)?, mode).map_err(py_err)?.value)
}

#[pyfunction]
fn h_0(state: &PyQuantumState) -> f64 {
    entropy::h_0(&state.inner)
}

#[pyfunction]
fn h_max(state: &PyQuantumState) -> f64 {
    entropy::h_max(&state.inner)
}

#[pyfunction]
fn purified_distance(rho: &PyQuantumState, sigma: &PyQuantumState) -> PyResult<f64> {
    entropy::purified_distance(&rho.inner, &sigma.inner).map_err(py_err)
}

/// Evaluates a named closed-form bound; see `BoundKind` for the names and parameters.
#[pyfunction]
fn bound_evaluate(which: &str, params: BTreeMap<String, f64>) -> PyResult<f64> {
    let kind: BoundKind = which.parse().map_err(py_err)?;
    let mut p = BoundParams::new();
    for (k, v) in &params {
        p.set(k, *v);
    }
    dec::bound_evaluate(kind, &p).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (d_a1, d_a2, samples, seed, stream = 1))]
fn prop1_quantities(
    py: Python<'_>,
    d_a1: usize,
    d_a2: usize,
    samples: usize,
    seed: u64,
    stream: u64,
) -> PyResult<Bound<'_, PyDict>> {
    let r = py.detach(|| dec::prop1_quantities(d_a1, d_a2, samples, RngSpec::new(seed, stream))).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("closed_form", r.closed_form)?;
    d.set_item("exact_twirl", r.exact_second_moment)?;
    d.set_item("mc_mean", r.mc_mean)?;
    d.set_item("mc_std", r.mc_std_error)?;
    d.set_item("lower_bound", r.lower_bound)?;
    d.set_item("haar_bound", r.haar_bound)?;
    Ok(d)
}

#[pyfunction]
fn merging_rates<'py>(
    py: Python<'py>,
    psi_abr: &PyQuantumState,
    ell: usize,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = apps::merging_rates(&psi_abr.inner, ell, delta).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("e_gain", r.e_gain)?;
    d.set_item("q_cost", r.q_cost)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("delta_prime", r.delta_prime)?;
    d.set_item("h_min_ar", r.h_min_ar)?;
    d.set_item("h_0_a", r.h_0_a)?;
    d.set_item("label", apps::SURROGATE_LABEL)?;
    Ok(d)
}

#[pyfunction]
fn corollary6_threshold(h_min_ar: f64, d_a: usize, ell: usize, epsilon: f64) -> PyResult<f64> {
    apps::corollary6_threshold(h_min_ar, d_a, ell, epsilon).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (rho_xi_r, dims, ell, eps1, eps2, eps3, delta_target, xi = None))]
#[allow(clippy::too_many_arguments)]
fn thermalisation_check<'py>(
    py: Python<'py>,
    rho_xi_r: &PyQuantumState,
    dims: (usize, usize, usize),
    ell: usize,
    eps1: f64,
    eps2: f64,
    eps3: f64,
    delta_target: f64,
    xi: Option<Rows>,
) -> PyResult<Bound<'py, PyDict>> {
    let xi = xi.map(to_matrix).transpose()?;
    let v = apps::thermalisation_check(
        &rho_xi_r.inner,
        xi.as_ref(),
        ThermalDims { d_s: dims.0, d_e: dims.1, d_r: dims.2 },
        ThermalParams { ell, eps1, eps2, eps3, delta_target },
    )
    .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("lhs", v.lhs)?;
    d.set_item("rhs", v.rhs)?;
    d.set_item("satisfied", v.satisfied)?;
    d.set_item("fraction_bound", v.fraction_bound)?;
    d.set_item("h_min_se_r", v.h_min_se_r)?;
    d.set_item("h_min_e", v.h_min_e)?;
    d.set_item("h_max_s", v.h_max_s)?;
    d.set_item("k", v.k)?;
    Ok(d)
}

/// Runs a configuration text and returns `(csv, summary, passed)`.
#[pyfunction]
fn run_config(py: Python<'_>, source: &str) -> PyResult<(String, String, bool)> {
    let cfg = cli::parse_config(source).map_err(|e| DiagdecError::new_err(e.to_string()))?;
    let out = py.detach(|| cli::run(&cfg)).map_err(py_err)?;
    Ok((out.csv, out.summary, out.passed))
}

#[pymodule]
fn diagdec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DiagdecError", m.py().get_type::<DiagdecError>())?;
    m.add_class::<PyQuantumState>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyDiagCircuit>()?;
    m.add_class::<PyDecouplingInstance>()?;
    m.add_function(wrap_pyfunction!(kron, m)?)?;
    m.add_function(wrap_pyfunction!(partial_trace, m)?)?;
    m.add_function(wrap_pyfunction!(trace_norm, m)?)?;
    m.add_function(wrap_pyfunction!(swap_operator, m)?)?;
    m.add_function(wrap_pyfunction!(sample_haar, m)?)?;
    m.add_function(wrap_pyfunction!(twirl2_diag, m)?)?;
    m.add_function(wrap_pyfunction!(twirl2_haar, m)?)?;
    m.add_function(wrap_pyfunction!(p_ell, m)?)?;
    m.add_function(wrap_pyfunction!(lemma5_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(diamond_norm, m)?)?;
    m.add_function(wrap_pyfunction!(design_distance, m)?)?;
    m.add_function(wrap_pyfunction!(h_min_cond, m)?)?;
    m.add_function(wrap_pyfunction!(h_2_cond, m)?)?;
    m.add_function(wrap_pyfunction!(h_0, m)?)?;
    m.add_function(wrap_pyfunction!(h_max, m)?)?;
    m.add_function(wrap_pyfunction!(purified_distance, m)?)?;
    m.add_function(wrap_pyfunction!(bound_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(prop1_quantities, m)?)?;
    m.add_function(wrap_pyfunction!(merging_rates, m)?)?;
    m.add_function(wrap_pyfunction!(corollary6_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(thermalisation_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
