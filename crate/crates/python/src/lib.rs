//! Python module `gaussmet`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: gm::Error) -> PyErr {
    use gm::Error::*;
    match e {
        DecompositionFailed(_) | SingularBeyondPureTol(_) | SingularMixture | NonIdentifiable(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows(m: &gm::linalg::RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn complex_rows(m: &gm::linalg::CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix(data: Vec<Vec<f64>>) -> PyResult<gm::linalg::RMat> {
    let n = data.len();
    if data.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(gm::linalg::RMat::from_fn(n, n, |i, j| data[i][j]))
}

/// Gaussian state given by its covariance matrix and displacement.
#[pyclass(name = "GaussianState", module = "gaussmet", from_py_object)]
#[derive(Clone)]
pub struct PyGaussianState {
    inner: gm::GaussianState,
}

#[pymethods]
impl PyGaussianState {
    #[new]
    fn new(gamma: Vec<Vec<f64>>, disp: Vec<f64>) -> PyResult<Self> {
        let g = matrix(gamma)?;
        let d = gm::linalg::RVec::from_vec(disp);
        Ok(Self { inner: gm::GaussianState::new(g, d).map_err(to_py)? })
    }

    #[staticmethod]
    fn vacuum(modes: usize) -> Self {
        Self { inner: gm::GaussianState::vacuum(modes) }
    }

    #[staticmethod]
    fn coherent(modes: usize, alpha: f64) -> Self {
        Self { inner: gm::GaussianState::coherent(modes, alpha) }
    }

    #[staticmethod]
    fn squeezed_vacuum(modes: usize, r: f64) -> Self {
        Self { inner: gm::GaussianState::squeezed_vacuum(modes, r) }
    }

    #[staticmethod]
    fn thermal(modes: usize, sigma: f64) -> PyResult<Self> {
        Ok(Self { inner: gm::GaussianState::thermal(modes, sigma).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (modes, nbar, mixed, seed))]
    fn random(modes: usize, nbar: f64, mixed: bool, seed: u64) -> PyResult<Self> {
        let class = if mixed { gm::PurityClass::Mixed } else { gm::PurityClass::Pure };
        Ok(Self { inner: gm::random_state(modes, nbar, class, seed).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = gm::GaussianState::from_json(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn gamma(&self) -> Vec<Vec<f64>> {
        rows(self.inner.gamma())
    }

    #[getter]
    fn disp(&self) -> Vec<f64> {
        self.inner.disp().iter().copied().collect()
    }

    fn mean_photon_number(&self) -> f64 {
        self.inner.mean_photon_number()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn symplectic_eigenvalues(&self) -> Vec<f64> {
        self.inner.symplectic_eigenvalues().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("GaussianState(modes={}, nbar={:.6})", self.inner.modes(), self.inner.mean_photon_number())
    }
}

/// Passive circuit with one phase parameter.
#[pyclass(name = "Circuit", module = "gaussmet", from_py_object)]
#[derive(Clone)]
pub struct PyCircuit {
    inner: gm::ParamCircuit,
}

#[pymethods]
impl PyCircuit {
    /// Parses the circuit text format.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self { inner: gm::parse_circuit(text).map_err(to_py)? })
    }

    /// Built-in circuit by name.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        gm::corpus::by_name(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no built-in circuit `{name}`")))
    }

    #[getter]
    fn modes(&self) -> usize {
        use gm::PassiveCircuit;
        self.inner.modes()
    }

    fn unitary(&self, phi: f64) -> Vec<Vec<Complex64>> {
        use gm::PassiveCircuit;
        complex_rows(&self.inner.unitary(phi))
    }

    fn generator(&self, phi: f64) -> Vec<Vec<Complex64>> {
        use gm::PassiveCircuit;
        complex_rows(&self.inner.generator_matrix(phi))
    }

    /// Generator eigenvalues, largest magnitude first.
    fn eigenvalues(&self, phi: f64) -> Vec<f64> {
        use gm::PassiveCircuit;
        self.inner.spectrum(phi).eps
    }

    fn specnorm(&self, phi: f64) -> f64 {
        use gm::PassiveCircuit;
        self.inner.spectrum(phi).specnorm
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

/// QFI report as a dict.
#[pyfunction]
fn qfi<'py>(py: Python<'py>, state: &PyGaussianState, circuit: &PyCircuit, phi: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = gm::qfi::qfi(&state.inner, &circuit.inner, phi).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("qfi", r.qfi)?;
    d.set_item("f1", r.f1)?;
    d.set_item("f2", r.f2)?;
    d.set_item("bound", r.bound)?;
    d.set_item("saturation_residual", r.saturation_residual)?;
    d.set_item("lambda_residual", r.lambda_residual)?;
    d.set_item(
        "route",
        match r.route {
            gm::Route::MixedStein => "mixed-stein",
            gm::Route::PureClosedForm => "pure-closed-form",
        },
    )?;
    d.set_item("specnorm", r.specnorm)?;
    d.set_item("nbar", r.nbar)?;
    Ok(d)
}

#[pyfunction]
fn qfi_bound(g_specnorm: f64, nbar: f64) -> f64 {
    gm::qfi::qfi_bound(g_specnorm, nbar)
}

#[pyfunction]
fn squeeze_param(nbar: f64) -> PyResult<f64> {
    gm::probe::squeeze_param(nbar).map_err(to_py)
}

#[pyfunction]
fn optimal_state(circuit: &PyCircuit, phi_guess: f64, nbar: f64) -> PyResult<PyGaussianState> {
    let p = gm::probe::optimal_state(&circuit.inner, phi_guess, nbar).map_err(to_py)?;
    Ok(PyGaussianState { inner: p.state })
}

#[pyfunction]
fn homodyne_fi(circuit: &PyCircuit, phi: f64, r0: f64, theta: f64) -> f64 {
    gm::homodyne::homodyne_fi(&circuit.inner, phi, r0, theta)
}

#[pyfunction]
fn optimal_theta(r0: f64) -> f64 {
    gm::homodyne::optimal_theta(r0)
}

#[pyfunction]
#[pyo3(name = "sequential_bound")]
fn sequential_bound_py(g_specnorm: f64, passes: usize, nbar: f64) -> f64 {
    gm::sequential::sequential_bound(g_specnorm, passes, nbar)
}

/// QFI of the optimal probe through `passes` runs with optimal controls.
#[pyfunction]
fn sequential_qfi(circuit: &PyCircuit, phi: f64, nbar: f64, passes: usize) -> PyResult<f64> {
    use gm::PassiveCircuit;
    if passes == 0 {
        return Err(PyValueError::new_err("passes must be at least 1"));
    }
    let controls = gm::sequential::optimal_controls(&circuit.inner, phi, passes);
    let seq = gm::sequential::SequentialCircuit::new(&circuit.inner, circuit.inner.modes(), controls).map_err(to_py)?;
    let probe = gm::probe::optimal_state(&seq, phi, nbar).map_err(to_py)?;
    Ok(gm::qfi::qfi(&probe.state, &seq, phi).map_err(to_py)?.qfi)
}

#[pymodule]
fn gaussmet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianState>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(qfi, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_bound, m)?)?;
    m.add_function(wrap_pyfunction!(squeeze_param, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_state, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_fi, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_theta, m)?)?;
    m.add_function(wrap_pyfunction!(sequential_bound_py, m)?)?;
    m.add_function(wrap_pyfunction!(sequential_qfi, m)?)?;
    Ok(())
}
