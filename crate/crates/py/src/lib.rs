use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hallfem_core::diagnostics::{self, DiagnosticsRow};
use hallfem_core::mesh::{build_unit_box_mesh, SimplicialMesh};
use hallfem_core::scheme::{self, Discretization, Experiment, SchemeConfig, State};
use hallfem_core::study;
use hallfem_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::InvalidResolution(_)
        | Error::UnsupportedDimension(_)
        | Error::NotNested { .. }
        | Error::DimensionMismatch(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Structured simplicial mesh of the unit square or cube.
#[pyclass(name = "Mesh", frozen)]
struct PyMesh {
    inner: Arc<SimplicialMesh>,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(n: usize, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(build_unit_box_mesh(n, dim).map_err(py_err)?),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }
    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }
    #[getter]
    fn n_faces(&self) -> usize {
        self.inner.n_faces()
    }
    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }
    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices().to_vec()
    }
    fn cells(&self) -> Vec<Vec<usize>> {
        (0..self.inner.n_cells())
            .map(|c| self.inner.cell(c).to_vec())
            .collect()
    }
    fn __repr__(&self) -> String {
        format!(
            "Mesh(dim={}, n={}, cells={})",
            self.inner.dim(),
            self.inner.resolution(),
            self.inner.n_cells()
        )
    }
}

/// One row of the diagnostics time series.
#[pyclass(name = "Diagnostics", frozen, get_all)]
#[derive(Clone)]
struct PyDiagnostics {
    step: usize,
    time: f64,
    energy: f64,
    kinetic: f64,
    grad_kinetic: f64,
    magnetic: f64,
    current: f64,
    max_div_b: f64,
    solver_iters: usize,
    solver_residual: f64,
}

impl From<DiagnosticsRow> for PyDiagnostics {
    fn from(r: DiagnosticsRow) -> Self {
        Self {
            step: r.step,
            time: r.time,
            energy: r.energy,
            kinetic: r.kinetic,
            grad_kinetic: r.grad_kinetic,
            magnetic: r.magnetic,
            current: r.current,
            max_div_b: r.max_div_b,
            solver_iters: r.solver_iters,
            solver_residual: r.solver_residual,
        }
    }
}

#[pymethods]
impl PyDiagnostics {
    fn __repr__(&self) -> String {
        format!(
            "Diagnostics(step={}, time={}, energy={:.10e}, max_div_b={:.3e})",
            self.step, self.time, self.energy, self.max_div_b
        )
    }
}

/// A time-stepping simulation of one of the built-in experiments.
#[pyclass(name = "Simulation")]
struct PySimulation {
    cfg: SchemeConfig,
    disc: Discretization,
    state: State,
}

#[pymethods]
impl PySimulation {
    #[new]
    #[pyo3(signature = (experiment, n, tau, t_final, nu=None, sigma=None, eta=None, alpha1=None, alpha2=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        experiment: &str,
        n: usize,
        tau: f64,
        t_final: f64,
        nu: Option<f64>,
        sigma: Option<f64>,
        eta: Option<f64>,
        alpha1: Option<f64>,
        alpha2: Option<f64>,
    ) -> PyResult<Self> {
        let exp = Experiment::parse(experiment)
            .ok_or_else(|| PyValueError::new_err(format!("unknown experiment '{experiment}'")))?;
        let mut cfg = SchemeConfig::preset(exp, n, tau, t_final);
        for (slot, v) in [
            (&mut cfg.nu, nu),
            (&mut cfg.sigma, sigma),
            (&mut cfg.eta, eta),
            (&mut cfg.alpha1, alpha1),
            (&mut cfg.alpha2, alpha2),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        cfg.validate().map_err(py_err)?;
        let disc = Discretization::new(n, cfg.dim).map_err(py_err)?;
        let state = scheme::initialize_state(&disc, &cfg).map_err(py_err)?;
        Ok(Self { cfg, disc, state })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.cfg.dim
    }
    #[getter]
    fn time(&self) -> f64 {
        self.state.time
    }
    #[getter]
    fn step_index(&self) -> usize {
        self.state.step
    }
    #[getter]
    fn n_steps(&self) -> usize {
        self.cfg.n_steps()
    }
    #[getter]
    fn n_unknowns(&self) -> usize {
        self.disc.n_unknowns()
    }

    /// Diagnostics of the current state.
    fn diagnostics(&self) -> PyDiagnostics {
        diagnostics::row(&self.disc, &self.state, &self.cfg, None).into()
    }

    /// Advances one step and returns its diagnostics.
    fn step(&mut self) -> PyResult<PyDiagnostics> {
        let (next, info) = scheme::step(&self.disc, &self.state, &self.cfg).map_err(py_err)?;
        self.state = next;
        Ok(diagnostics::row(&self.disc, &self.state, &self.cfg, Some(info)).into())
    }

    /// Advances to the final time; returns the diagnostics of every step.
    fn run(&mut self) -> PyResult<Vec<PyDiagnostics>> {
        let mut rows = Vec::new();
        while self.state.step < self.cfg.n_steps() {
            rows.push(self.step()?);
        }
        Ok(rows)
    }

    /// Cell divergences of `B`.
    fn div_b(&self) -> Vec<f64> {
        hallfem_core::feec::div_values(self.disc.mesh(), &self.state.b)
    }

    /// Degrees of freedom of one field: `u`, `p`, `B`, `E` or `J`.
    fn field(&self, name: &str) -> PyResult<Vec<f64>> {
        let s = &self.state;
        Ok(match name {
            "u" => s.u.clone(),
            "p" => s.p.clone(),
            "B" | "b" => s.b.clone(),
            "E" | "e" => s.e.clone(),
            "J" | "j" => s.j.clone(),
            _ => return Err(PyValueError::new_err(format!("unknown field '{name}'"))),
        })
    }

    /// Writes the current state as legacy VTK.
    fn write_vtk(&self, path: &str) -> PyResult<()> {
        diagnostics::write_vtk_file(&self.disc, &self.state, std::path::Path::new(path))
            .map_err(py_err)
    }
}

/// Runs the structural check battery; returns `(name, passed, detail)`.
#[pyfunction]
fn check() -> Vec<(String, bool, String)> {
    study::check_battery()
        .into_iter()
        .map(|r| (r.name, r.passed, r.detail))
        .collect()
}

/// Observed rates `log(e_i / e_{i+1}) / log(s_i / s_{i+1})`.
#[pyfunction]
fn observed_rates(steps: Vec<f64>, errors: Vec<f64>) -> PyResult<Vec<f64>> {
    if steps.len() != errors.len() {
        return Err(PyValueError::new_err("steps and errors differ in length"));
    }
    Ok(study::observed_rates(&steps, &errors))
}

/// The `hallfem` Python module.
#[pymodule]
pub fn hallfem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyDiagnostics>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(observed_rates, m)?)?;
    Ok(())
}
