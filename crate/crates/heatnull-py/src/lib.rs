use heatnull::biorthogonal::{assemble_control, multiplier_family, ControlSignal, FamilyOptions};
use heatnull::error::Error;
use heatnull::harness::{self, ExperimentConfig};
use heatnull::heatsim::{self, ObservationRegion};
use heatnull::spectral::{build_interval_basis, reduce_to_canonical, BasisKind, HeatState, SpectralBasis};
use heatnull::transmute::{self, FundamentalOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::Precondition(_) | Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Eigenbasis of −∂² on [0, X] with closed-form modes.
#[pyclass(name = "Basis")]
#[derive(Clone)]
struct PyBasis {
    inner: SpectralBasis,
}

#[pymethods]
impl PyBasis {
    /// kind: "DD" (Dirichlet at both ends) or "ND" (Neumann at 0).
    #[new]
    #[pyo3(signature = (x_len, count, kind = "DD"))]
    fn new(x_len: f64, count: usize, kind: &str) -> PyResult<Self> {
        let k: BasisKind = kind.parse().map_err(py_err)?;
        Ok(PyBasis { inner: build_interval_basis(k, x_len, count).map_err(py_err)? })
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas.clone()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.length
    }

    fn eval(&self, n: usize, x: f64) -> PyResult<f64> {
        if n == 0 || n > self.inner.count() {
            return Err(PyValueError::new_err(format!("mode {n} outside 1..={}", self.inner.count())));
        }
        Ok(self.inner.eval(n, x))
    }

    fn __len__(&self) -> usize {
        self.inner.count()
    }
}

/// Sampled boundary control on a uniform grid.
#[pyclass(name = "Control")]
struct PyControl {
    inner: ControlSignal,
    #[pyo3(get)]
    ln_cost: f64,
}

#[pymethods]
impl PyControl {
    #[getter]
    fn times(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|i| self.inner.time(i)).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.samples.clone()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    /// Terminal coefficients of the controlled heat equation from `u0`.
    fn simulate(&self, basis: &PyBasis, u0: Vec<f64>) -> PyResult<Vec<f64>> {
        let st = state(&basis.inner, u0)?;
        let t = self.inner.window.1;
        let tr = heatsim::simulate_boundary_control(&basis.inner, &st, &self.inner, t).map_err(py_err)?;
        Ok(tr.terminal().coeffs.clone())
    }
}

fn state(basis: &SpectralBasis, mut c: Vec<f64>) -> PyResult<HeatState> {
    if c.len() > basis.count() {
        return Err(PyValueError::new_err("more coefficients than basis modes"));
    }
    c.resize(basis.count(), 0.0);
    Ok(HeatState::new(c, basis))
}

/// Null-control from x = X steering `u0` to zero in time `t`.
#[pyfunction]
#[pyo3(signature = (basis, u0, t, family_modes = 10))]
fn null_control(basis: &PyBasis, u0: Vec<f64>, t: f64, family_modes: usize) -> PyResult<PyControl> {
    let st = state(&basis.inner, u0)?;
    let (red, sched) = reduce_to_canonical(&basis.inner, t);
    let fam = multiplier_family(&red, sched, family_modes, &FamilyOptions::default()).map_err(py_err)?;
    let out = assemble_control(&basis.inner, &st, &fam, t).map_err(py_err)?;
    Ok(PyControl { inner: out.signal, ln_cost: out.ln_cost })
}

/// (Σ*, α₁, α₂)
#[pyfunction]
#[pyo3(signature = (tol = 1e-10))]
fn sigma_star(tol: f64) -> (f64, f64, f64) {
    heatnull::entire::sigma_star(tol)
}

#[pyfunction]
fn kannai_residual(basis: &PyBasis, u0: Vec<f64>, t: f64) -> PyResult<f64> {
    transmute::kannai_residual(&basis.inner, &state(&basis.inner, u0)?, t).map_err(py_err)
}

#[pyfunction]
fn longest_avoiding_ray(a: f64, b: f64, x_len: f64) -> PyResult<f64> {
    let r = ObservationRegion::new(a, b).map_err(py_err)?;
    transmute::longest_avoiding_ray(&r, x_len).map_err(py_err)
}

/// Observability quotient of the concentrated state at y; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (basis, a, b, y, t, eps = None))]
fn lower_bound<'py>(py: Python<'py>, basis: &PyBasis, a: f64, b: f64, y: f64, t: f64, eps: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = ObservationRegion::new(a, b).map_err(py_err)?;
    let eps = eps.unwrap_or_else(|| heatsim::default_lower_eps(r.distance(y)));
    let rep = heatsim::lower_bound_experiment(&basis.inner, &r, y, eps, t).map_err(py_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("T", rep.t)?;
    d.set_item("q", rep.q)?;
    d.set_item("minus_T_ln_q", rep.minus_t_ln_q)?;
    d.set_item("d_squared_over_4", rep.d_squared_over_4)?;
    Ok(d)
}

/// Heat solution on [−L, L] from δ at 0, steered to zero from both ends.
#[pyclass(name = "FundamentalSolution")]
struct PyFundamental {
    inner: transmute::FundamentalControlledSolution,
}

#[pymethods]
impl PyFundamental {
    #[new]
    #[pyo3(signature = (t, l, eps = 0.2))]
    fn new(t: f64, l: f64, eps: f64) -> PyResult<Self> {
        let opts = FundamentalOptions { eps, ..FundamentalOptions::default() };
        Ok(PyFundamental { inner: transmute::fundamental_solution(t, l, &opts).map_err(py_err)? })
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm
    }

    #[getter]
    fn terminal_norm(&self) -> f64 {
        self.inner.terminal_norm
    }

    fn eval(&self, t: f64, s: f64) -> f64 {
        self.inner.eval(t, s)
    }

    /// ⟨v(0), cos(πs/2L)⟩ at the δ truncation (1 in exact arithmetic).
    fn pairing_cos(&self) -> f64 {
        let l = self.inner.l;
        self.inner.pairing(&|s: f64| (std::f64::consts::PI * s / (2.0 * l)).cos())
    }

    /// Interior control on (a, b) for `u0` through an N-mode wave control with S = L.
    fn transmute<'py>(&self, py: Python<'py>, basis: &PyBasis, a: f64, b: f64, u0: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let r = ObservationRegion::new(a, b).map_err(py_err)?;
        let n = basis.inner.count();
        let wave = transmute::wave_hum_control(&basis.inner, &r, &state(&basis.inner, u0)?, self.inner.l, n).map_err(py_err)?;
        let tr = transmute::transmute_control(&self.inner, &wave).map_err(py_err)?;
        let d = PyDict::new_bound(py);
        d.set_item("g_norm", tr.g_norm)?;
        d.set_item("v_norm", tr.v_norm)?;
        d.set_item("f_ext_norm", tr.f_ext_norm)?;
        d.set_item("terminal", tr.terminal_simulated.clone())?;
        d.set_item("initial_error", tr.initial_error.clone())?;
        Ok(d)
    }
}

/// Cost sweep from a JSON config; returns the CSV text.
#[pyfunction]
fn cost_sweep(config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json_str(config_json).map_err(py_err)?;
    Ok(harness::cost_sweep(&cfg).map_err(py_err)?.to_csv())
}

/// Bound sandwich from a JSON config; returns the report as JSON text.
#[pyfunction]
fn sandwich(config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json_str(config_json).map_err(py_err)?;
    let rep = harness::bound_sandwich_report(&cfg).map_err(py_err)?;
    serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn heatnull_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBasis>()?;
    m.add_class::<PyControl>()?;
    m.add_class::<PyFundamental>()?;
    m.add_function(wrap_pyfunction!(null_control, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_star, m)?)?;
    m.add_function(wrap_pyfunction!(kannai_residual, m)?)?;
    m.add_function(wrap_pyfunction!(longest_avoiding_ray, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cost_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich, m)?)?;
    m.add("ALPHA_2", heatnull::entire::ALPHA_2)?;
    Ok(())
}
