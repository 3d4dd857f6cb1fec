//! Python bindings: meshes, problems, scheme solves, diagnostics and the
//! batch experiments. Structured inputs (problem, scheme and experiment
//! specifications) are accepted as dicts or JSON strings in the same
//! format as the CLI configuration files.

// pyo3 0.2x method wrappers trip this lint on `?` over `PyErr`.
#![allow(clippy::useless_conversion)]

use std::path::PathBuf;

use polyfv::diagnostics::{check_m_matrix, check_spd_min_eig, diagnose, DiagnosticsReport};
use polyfv::experiment::{
    run_convergence, run_solve, run_transient, ExperimentConfig, OutputOptions, ProblemSpec, RunSpec,
};
use polyfv::mesh::{read_mesh, write_mesh, CellPointRule, Rect};
use polyfv::scheme::{solve_problem, SchemeKind, SchemeSolution, SolveOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

fn runtime<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// JSON text of a dict or string argument.
fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.downcast::<PyString>() {
        return Ok(s.to_str()?.to_owned());
    }
    let json = obj.py().import_bound("json")?;
    json.call_method1("dumps", (obj,))?.extract()
}

fn parse<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    serde_json::from_str(&json_text(obj)?).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Converts a serialisable value to Python objects through JSON.
fn to_python<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(runtime)?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

fn scheme_kind(obj: &Bound<'_, PyAny>) -> PyResult<SchemeKind> {
    match obj.downcast::<PyString>() {
        Ok(name) if !name.to_str()?.trim_start().starts_with('{') => {
            serde_json::from_value(serde_json::json!({ "name": name.to_str()? }))
                .map_err(|e| PyValueError::new_err(e.to_string()))
        }
        _ => parse(obj),
    }
}

#[pyclass(name = "Mesh", module = "polyfv")]
#[derive(Clone)]
struct PyMesh {
    inner: polyfv::Mesh,
}

#[pymethods]
impl PyMesh {
    /// `nx × ny` rectangles on `[x0, x1] × [y0, y1]`.
    #[staticmethod]
    #[pyo3(signature = (nx, ny, domain=(0.0, 1.0, 0.0, 1.0)))]
    fn cartesian(nx: usize, ny: usize, domain: (f64, f64, f64, f64)) -> PyResult<Self> {
        let rect = Rect { x0: domain.0, x1: domain.1, y0: domain.2, y1: domain.3 };
        Ok(PyMesh { inner: polyfv::Mesh::build_cartesian(nx, ny, rect).map_err(runtime)? })
    }

    /// Each rectangle split along its anti-diagonal; `cell_points` is
    /// `"barycenter"` or `"incenter"`.
    #[staticmethod]
    #[pyo3(signature = (nx, ny, cell_points="barycenter", domain=(0.0, 1.0, 0.0, 1.0)))]
    fn triangular(nx: usize, ny: usize, cell_points: &str, domain: (f64, f64, f64, f64)) -> PyResult<Self> {
        let rule = match cell_points {
            "barycenter" => CellPointRule::Barycenter,
            "incenter" => CellPointRule::Incenter,
            other => return Err(PyValueError::new_err(format!("unknown cell point rule {other:?}"))),
        };
        let rect = Rect { x0: domain.0, x1: domain.1, y0: domain.2, y1: domain.3 };
        Ok(PyMesh { inner: polyfv::Mesh::build_triangular(nx, ny, rect, rule).map_err(runtime)? })
    }

    /// Reads the text mesh format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: read_mesh(text).map_err(runtime)? })
    }

    fn to_text(&self) -> String {
        write_mesh(&self.inner)
    }

    /// Random interior vertex displacement, reproducible from `seed`.
    fn perturbed(&self, amplitude: f64, seed: u64) -> PyResult<Self> {
        Ok(PyMesh { inner: self.inner.perturb_random(amplitude, seed).map_err(runtime)? })
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|p| (p.x, p.y)).collect()
    }

    fn cells(&self) -> Vec<Vec<usize>> {
        self.inner.cells().to_vec()
    }

    fn cell_points(&self) -> Vec<(f64, f64)> {
        self.inner.cell_points().iter().map(|p| (p.x, p.y)).collect()
    }

    fn cell_areas(&self) -> Vec<f64> {
        self.inner.cell_areas().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(cells={}, edges={}, vertices={})",
            self.inner.n_cells(),
            self.inner.n_edges(),
            self.inner.n_vertices()
        )
    }
}

/// Problem data, built from a manufactured case or a custom specification,
/// e.g. `{"manufactured": {"case": "sine_iso"}}`.
#[pyclass(name = "Problem", module = "polyfv")]
#[derive(Clone)]
struct PyProblem {
    spec: ProblemSpec,
    inner: polyfv::Problem,
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: ProblemSpec = parse(spec)?;
        let inner = spec.problem().map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyProblem { spec, inner })
    }

    /// Shorthand for a manufactured case: `Problem.manufactured("bubble_aniso", ratio=1e4)`.
    #[staticmethod]
    #[pyo3(signature = (case, **params))]
    fn manufactured(py: Python<'_>, case: &str, params: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let dict = pyo3::types::PyDict::new_bound(py);
        if let Some(p) = params {
            dict.update(p.as_mapping())?;
        }
        dict.set_item("case", case)?;
        let outer = pyo3::types::PyDict::new_bound(py);
        outer.set_item("manufactured", dict)?;
        Self::new(outer.as_any())
    }

    fn has_exact(&self) -> bool {
        self.inner.exact.is_some()
    }

    /// Exact solution at `(x, y)`, if known.
    fn exact(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.exact.as_ref().map(|e| (e.u)(&polyfv::Point::new(x, y)))
    }

    fn spec(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_python(py, &self.spec)
    }
}

/// Result of a solve: cell values, fluxes and the assembled system.
#[pyclass(name = "Solution", module = "polyfv")]
struct PySolution {
    kind: SchemeKind,
    mesh: polyfv::Mesh,
    problem: polyfv::Problem,
    inner: SchemeSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn cells(&self) -> Vec<f64> {
        self.inner.field.cells.clone()
    }

    #[getter]
    fn edges(&self) -> Option<Vec<f64>> {
        self.inner.field.edges.clone()
    }

    #[getter]
    fn vertices(&self) -> Option<Vec<f64>> {
        self.inner.field.vertices.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    /// Increment norms of the Picard iterations (empty for linear schemes).
    #[getter]
    fn history(&self) -> Vec<f64> {
        self.inner.history.clone()
    }

    /// `F_{K,σ}` for each cell, in the order of the cell's edges.
    fn cell_fluxes(&self) -> Vec<Vec<f64>> {
        self.inner.fluxes.cell.clone()
    }

    fn min(&self) -> f64 {
        self.inner.field.min()
    }

    fn max(&self) -> f64 {
        self.inner.field.max()
    }

    /// Assembled (or final frozen) matrix as `(rows, cols, values)` and the right-hand side.
    fn system(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>) {
        let sys = &self.inner.assembled.system;
        let (mut r, mut c, mut v) = (Vec::new(), Vec::new(), Vec::new());
        for (i, j, a) in sys.matrix.triplets() {
            r.push(i);
            c.push(j);
            v.push(a);
        }
        (r, c, v, sys.rhs.clone())
    }

    /// Full diagnostics report as a dict.
    fn diagnostics(&self, py: Python<'_>) -> PyResult<PyObject> {
        let report: DiagnosticsReport =
            diagnose(&self.kind, &self.mesh, "python", &self.problem, &self.inner).map_err(runtime)?;
        to_python(py, &report)
    }

    /// M-matrix test of the assembled matrix.
    fn m_matrix(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_python(py, &check_m_matrix(&self.inner.assembled.system.matrix))
    }

    /// Symmetry and smallest eigenvalue of the assembled matrix.
    fn spd(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_python(py, &check_spd_min_eig(&self.inner.assembled.system.matrix))
    }
}

/// Discretises `problem` on `mesh` with `scheme` (a name such as `"hmm"` or a
/// spec like `{"name": "corrected", "base": {"name": "tpfa"}}`) and solves,
/// by Picard iteration for the nonlinear schemes.
#[pyfunction]
fn solve(mesh: &PyMesh, problem: &PyProblem, scheme: &Bound<'_, PyAny>) -> PyResult<PySolution> {
    let kind = scheme_kind(scheme)?;
    let inner = solve_problem(&kind, &mesh.inner, &problem.inner, &SolveOptions::default()).map_err(runtime)?;
    Ok(PySolution { kind, mesh: mesh.inner.clone(), problem: problem.inner.clone(), inner })
}

/// Runs an experiment configuration; returns `{"passed", "failures", "written"}`.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, dump_matrix=false))]
fn run_experiment(
    py: Python<'_>,
    config: &Bound<'_, PyAny>,
    out_dir: Option<PathBuf>,
    dump_matrix: bool,
) -> PyResult<PyObject> {
    let config = ExperimentConfig::from_json(&json_text(config)?).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = OutputOptions { dir: out_dir.or_else(|| config.out_dir.clone()), dump_matrix };
    let (failures, written) = match config.run {
        RunSpec::Solve => run_solve(&config, &out).map(|o| (o.failures, o.written)),
        RunSpec::Convergence { .. } => run_convergence(&config, &out).map(|o| (o.failures, o.written)),
        RunSpec::Transient { .. } => run_transient(&config, &out).map(|o| (o.failures, o.written)),
    }
    .map_err(runtime)?;
    let summary = serde_json::json!({ "passed": failures.is_empty(), "failures": failures, "written": written });
    to_python(py, &summary)
}

#[pymodule]
#[pyo3(name = "polyfv")]
pub fn polyfv_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
