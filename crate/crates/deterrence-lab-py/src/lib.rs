//! Python bindings.
//!
//! Parameters and solver settings are plain classes; equilibria wrap the
//! solved profile and expose verification and simulation directly. Rich
//! records (diagnostics, reports, sweep rows) are returned as dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use deterrence_lab::cli::demo_intro_text;
use deterrence_lab::equilibrium::{self, EquilibriumProfile, Regime};
use deterrence_lab::game_model::{GameParams, StrategyProfile};
use deterrence_lab::sweeps::{self, SweepRow};
use deterrence_lab::verification::{best_response_residuals, monte_carlo};
use deterrence_lab::{distributions::ShockDistribution, LabError};

create_exception!(deterrence_lab, LabException, PyException, "Base class of solver errors.");
create_exception!(deterrence_lab, NoEquilibriumError, LabException, "No equilibrium exists at these parameters.");
create_exception!(deterrence_lab, NonConvergenceError, LabException, "The solver did not reach tolerance.");
create_exception!(deterrence_lab, VerificationError, LabException, "A profile failed verification.");

fn to_py(e: LabError) -> PyErr {
    match e {
        LabError::InvalidParameter { .. } | LabError::Domain(_) | LabError::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        LabError::NoEquilibrium(_) => NoEquilibriumError::new_err(e.to_string()),
        LabError::NonConvergence(_) => NonConvergenceError::new_err(e.to_string()),
        LabError::Verification(_) => VerificationError::new_err(e.to_string()),
        _ => LabException::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serialize through JSON into native Python objects.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn regime(name: &str) -> PyResult<Regime> {
    Regime::from_cli(name).map_err(to_py)
}

/// Model primitives.
#[pyclass(name = "GameParams", from_py_object)]
#[derive(Clone)]
struct PyGameParams {
    inner: GameParams,
}

#[pymethods]
impl PyGameParams {
    #[new]
    #[pyo3(signature = (n=1, b=1.0, c=10.0, L=5.0, delta=0.95, alpha=0.5, pi_star=0.95, pi_o=1.0, mu=0.0, sigma=1.0))]
    #[allow(clippy::too_many_arguments, non_snake_case)]
    fn new(
        n: usize,
        b: f64,
        c: f64,
        L: f64,
        delta: f64,
        alpha: f64,
        pi_star: f64,
        pi_o: f64,
        mu: f64,
        sigma: f64,
    ) -> PyResult<Self> {
        let inner = GameParams {
            n,
            b,
            c,
            l: L,
            delta,
            alpha,
            pi_star,
            pi_o,
            gamma: 0.0,
            shock: ShockDistribution::new(mu, sigma).map_err(to_py)?,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter(L)]
    fn l(&self) -> f64 {
        self.inner.l
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn pi_star(&self) -> f64 {
        self.inner.pi_star
    }

    #[getter]
    fn pi_o(&self) -> f64 {
        self.inner.pi_o
    }

    /// Copy with another punishment level.
    #[pyo3(name = "with_L")]
    fn with_l(&self, l: f64) -> PyResult<Self> {
        let inner = self.inner.with_l(l);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Copy with another population size.
    fn with_n(&self, n: usize) -> PyResult<Self> {
        let inner = self.inner.with_n(n);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "GameParams(n={}, b={}, c={}, L={}, delta={}, alpha={}, pi_star={}, pi_o={})",
            p.n, p.b, p.c, p.l, p.delta, p.alpha, p.pi_star, p.pi_o
        )
    }
}

/// Root-finding settings.
#[pyclass(name = "SolverConfig", from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    inner: equilibrium::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (tol=None, max_iter=None, damping=None, multistart=None))]
    fn new(tol: Option<f64>, max_iter: Option<usize>, damping: Option<f64>, multistart: Option<usize>) -> PyResult<Self> {
        let d = equilibrium::SolverConfig::default();
        let inner = equilibrium::SolverConfig {
            tol: tol.unwrap_or(d.tol),
            max_iter: max_iter.unwrap_or(d.max_iter),
            damping: damping.unwrap_or(d.damping),
            multistart_grid: multistart.unwrap_or(d.multistart_grid),
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn tol(&self) -> f64 {
        self.inner.tol
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SolverConfig(tol={:e}, max_iter={}, damping={}, multistart={})",
            c.tol, c.max_iter, c.damping, c.multistart_grid
        )
    }
}

fn solver_or_default(cfg: Option<PySolverConfig>) -> equilibrium::SolverConfig {
    cfg.map(|c| c.inner).unwrap_or_default()
}

/// A solved equilibrium.
#[pyclass(name = "Equilibrium", from_py_object)]
#[derive(Clone)]
struct PyEquilibrium {
    inner: EquilibriumProfile,
}

#[pymethods]
impl PyEquilibrium {
    #[getter]
    fn regime(&self) -> &'static str {
        self.inner.regime.cli_name()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    #[getter]
    fn omega_star(&self) -> f64 {
        self.inner.omega_star()
    }

    #[getter]
    fn omega_star2(&self) -> f64 {
        self.inner.omega_star2()
    }

    #[getter]
    fn pi(&self) -> f64 {
        self.inner.pi
    }

    #[getter]
    fn informativeness(&self) -> f64 {
        self.inner.informativeness_max
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn correlation(&self) -> Option<f64> {
        self.inner.diagnostics.correlation
    }

    #[getter]
    fn substitutes_index(&self) -> Option<f64> {
        self.inner.diagnostics.substitutes_index
    }

    /// Conviction probability for each report vector (bit `i` = agent `i` accuses).
    #[getter]
    fn rule(&self) -> PyResult<Vec<f64>> {
        self.inner.profile.rule.to_table().map_err(to_py)
    }

    #[getter]
    fn params(&self) -> PyGameParams {
        PyGameParams { inner: *self.inner.params() }
    }

    /// Best-response residuals recomputed from the profile.
    fn verify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        verify_profile(py, &self.inner.profile)
    }

    /// Seeded Monte Carlo report compared against exact enumeration.
    #[pyo3(signature = (seed, draws=1_000_000))]
    fn simulate(&self, py: Python<'_>, seed: u64, draws: u64) -> PyResult<Py<PyAny>> {
        simulate_profile(py, &self.inner.profile, draws, seed)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &self.inner)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: EquilibriumProfile = serde_json::from_str(text).map_err(json_err)?;
        inner.profile.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// The bare strategy profile as JSON, accepted by `verify` and `simulate`.
    fn profile_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.profile).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(regime={:?}, q={}, omega_star={}, omega_star2={}, pi={}, residual={:e})",
            self.regime(),
            self.inner.q,
            self.omega_star(),
            self.omega_star2(),
            self.inner.pi,
            self.inner.residual
        )
    }
}

fn verify_profile(py: Python<'_>, profile: &StrategyProfile) -> PyResult<Py<PyAny>> {
    let diag = py.detach(|| best_response_residuals(profile)).map_err(to_py)?;
    to_object(py, &diag)
}

fn simulate_profile(py: Python<'_>, profile: &StrategyProfile, draws: u64, seed: u64) -> PyResult<Py<PyAny>> {
    let report = py.detach(|| monte_carlo(profile, draws, seed)).map_err(to_py)?;
    to_object(py, &report)
}

fn parse_profile(text: &str) -> PyResult<StrategyProfile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
    let inner = match (value.get("equilibrium"), value.get("profile")) {
        (Some(eq), _) => eq.get("profile").cloned().unwrap_or_default(),
        (None, Some(p)) => p.clone(),
        (None, None) => value,
    };
    let profile: StrategyProfile = serde_json::from_value(inner).map_err(json_err)?;
    profile.validate().map_err(to_py)?;
    Ok(profile)
}

fn row_object(py: Python<'_>, row: &SweepRow) -> PyResult<Py<PyAny>> {
    let value = serde_json::json!({
        "regime": row.regime.cli_name(),
        "params": row.params,
        "q": row.q,
        "omega_star": row.omega_star,
        "omega_star2": row.omega_star2,
        "informativeness": row.informativeness,
        "pi": row.pi,
        "residual": row.residual,
        "status": row.status.as_str(),
        "correlation": row.correlation(),
    });
    to_object(py, &value)
}

/// Solve one regime. Regimes: single, app, app-two-type, app-complements, dpp.
#[pyfunction]
#[pyo3(signature = (regime_name, params, config=None))]
fn solve(py: Python<'_>, regime_name: &str, params: PyGameParams, config: Option<PySolverConfig>) -> PyResult<PyEquilibrium> {
    let r = regime(regime_name)?;
    let cfg = solver_or_default(config);
    let inner = py.detach(|| equilibrium::solve(r, &params.inner, &cfg)).map_err(to_py)?;
    Ok(PyEquilibrium { inner })
}

/// Complements regime at a chosen single-accusation conviction probability.
#[pyfunction]
#[pyo3(signature = (params, q_target, config=None))]
fn solve_complements(
    py: Python<'_>,
    params: PyGameParams,
    q_target: f64,
    config: Option<PySolverConfig>,
) -> PyResult<PyEquilibrium> {
    let cfg = solver_or_default(config);
    let inner =
        py.detach(|| equilibrium::solve_app_complements(&params.inner, q_target, &cfg)).map_err(to_py)?;
    Ok(PyEquilibrium { inner })
}

/// Best-response residuals of a profile given as JSON.
#[pyfunction]
fn verify(py: Python<'_>, profile_json: &str) -> PyResult<Py<PyAny>> {
    verify_profile(py, &parse_profile(profile_json)?)
}

/// Seeded simulation of a profile given as JSON.
#[pyfunction]
#[pyo3(signature = (profile_json, seed, draws=1_000_000))]
fn simulate(py: Python<'_>, profile_json: &str, seed: u64, draws: u64) -> PyResult<Py<PyAny>> {
    simulate_profile(py, &parse_profile(profile_json)?, draws, seed)
}

/// Solve along an ascending punishment grid; one dict per grid point.
#[pyfunction]
#[pyo3(signature = (params, grid, regime_name="app", config=None))]
fn sweep(
    py: Python<'_>,
    params: PyGameParams,
    grid: Vec<f64>,
    regime_name: &str,
    config: Option<PySolverConfig>,
) -> PyResult<Vec<Py<PyAny>>> {
    let r = regime(regime_name)?;
    let cfg = solver_or_default(config);
    let rows = py.detach(|| sweeps::sweep_l(&params.inner, &grid, r, &cfg)).map_err(to_py)?;
    rows.iter().map(|row| row_object(py, row)).collect()
}

/// Log-spaced (`a:b:k`) or comma-separated punishment grid.
#[pyfunction]
fn parse_grid(text: &str) -> PyResult<Vec<f64>> {
    sweeps::parse_grid(text).map_err(to_py)
}

/// Compare equilibria at two population sizes at the params' punishment.
#[pyfunction]
#[pyo3(signature = (params, n_small, n_large, regime_name="app", config=None))]
fn compare_n(
    py: Python<'_>,
    params: PyGameParams,
    n_small: usize,
    n_large: usize,
    regime_name: &str,
    config: Option<PySolverConfig>,
) -> PyResult<Py<PyAny>> {
    let r = regime(regime_name)?;
    let cfg = solver_or_default(config);
    let l = params.inner.l;
    let cmp = py.detach(|| sweeps::compare_n(&params.inner, n_small, n_large, l, r, &cfg)).map_err(to_py)?;
    let value = serde_json::json!({
        "n_small": cmp.n_small,
        "n_large": cmp.n_large,
        "L": cmp.l,
        "status": format!("{:?}", cmp.status),
        "orderings": cmp.orderings,
    });
    to_object(py, &value)
}

/// The worked two-defendant examples.
#[pyfunction]
fn demo_intro() -> String {
    demo_intro_text()
}

#[pymodule]
#[pyo3(name = "deterrence_lab")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyGameParams>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_complements, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(parse_grid, m)?)?;
    m.add_function(wrap_pyfunction!(compare_n, m)?)?;
    m.add_function(wrap_pyfunction!(demo_intro, m)?)?;
    m.add("LabException", py.get_type::<LabException>())?;
    m.add("NoEquilibriumError", py.get_type::<NoEquilibriumError>())?;
    m.add("NonConvergenceError", py.get_type::<NonConvergenceError>())?;
    m.add("VerificationError", py.get_type::<VerificationError>())?;
    Ok(())
}
