//! Python bindings. Indices on the Python side are 1-based, matching manifests.

use std::collections::HashMap;
use std::path::Path;

use pg_core::classes::{self, LieAlgebra};
use pg_core::connection::{self, ConnectionSymbols, Metric};
use pg_core::multivec::{self, DensityField, MultiVectorField};
use pg_core::transport::{self, CotangentPath, IntegratorConfig};
use pg_core::{parse_expr, Expr};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

fn to_py(e: pg_core::Error) -> PyErr {
    use pg_core::Error::*;
    match e {
        Parse(_) | Index(_) | DimensionMismatch { .. } | Invalid(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn eval_err(e: pg_core::EvalError) -> PyErr {
    PyRuntimeError::new_err(format!("evaluation failed: {e}"))
}

fn zero_based(idx: &[usize]) -> PyResult<Vec<usize>> {
    idx.iter()
        .map(|&i| i.checked_sub(1).ok_or_else(|| PyValueError::new_err("indices are 1-based")))
        .collect()
}

fn expr(src: &str, dim: usize) -> PyResult<Expr> {
    parse_expr(src, dim, false).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn field_strings(f: &MultiVectorField) -> Vec<String> {
    f.to_vec().iter().map(ToString::to_string).collect()
}

fn field_dict<'py>(py: Python<'py>, f: &MultiVectorField, point: &[f64]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (idx, v) in f.eval(point).map_err(eval_err)? {
        let key = PyTuple::new(py, idx.iter().map(|i| i + 1))?;
        d.set_item(key, v)?;
    }
    Ok(d)
}

/// A Poisson bivector on a single chart.
#[pyclass(name = "PoissonStructure", frozen)]
struct PyPoisson {
    inner: multivec::PoissonStructure,
}

#[pymethods]
impl PyPoisson {
    /// `components` maps `(i, j)` with `i < j` to an expression string.
    #[new]
    fn new(dim: usize, components: HashMap<(usize, usize), String>) -> PyResult<Self> {
        let mut comps: Vec<_> = components.into_iter().collect();
        comps.sort();
        let parsed = comps
            .iter()
            .map(|((i, j), s)| {
                let ij = zero_based(&[*i, *j])?;
                Ok((ij[0], ij[1], expr(s, dim)?))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyPoisson { inner: multivec::PoissonStructure::new(dim, parsed).map_err(to_py)? })
    }

    /// Lie-Poisson structure from `{(i, j, k): c^k_ij}` with `i < j`.
    #[staticmethod]
    fn lie_poisson(dim: usize, constants: HashMap<(usize, usize, usize), f64>) -> PyResult<Self> {
        Ok(PyPoisson { inner: lie_algebra(dim, constants)?.lie_poisson() })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, point: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.inner.eval(&point).map_err(eval_err)
    }

    /// `{f, g}` as an expression string.
    fn bracket(&self, f: &str, g: &str) -> PyResult<String> {
        let m = self.inner.dim();
        Ok(self.inner.bracket(&expr(f, m)?, &expr(g, m)?).to_string())
    }

    fn hamiltonian_field(&self, f: &str) -> PyResult<Vec<String>> {
        Ok(field_strings(&self.inner.hamiltonian_field(&expr(f, self.inner.dim())?)))
    }

    fn jacobiator_residual(&self, points: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner.jacobiator().max_abs_over(&points).map_err(eval_err)
    }

    /// Modular vector field of the density `weight · dx`.
    #[pyo3(signature = (weight = "1", points = None))]
    fn modular_vector_field(&self, weight: &str, points: Option<Vec<Vec<f64>>>) -> PyResult<Vec<String>> {
        let mu = DensityField::new(expr(weight, self.inner.dim())?);
        let pts = points.unwrap_or_default();
        Ok(field_strings(&self.inner.modular_vector_field(&mu, &pts).map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        format!("PoissonStructure(dim={})", self.inner.dim())
    }
}

fn lie_algebra(dim: usize, constants: HashMap<(usize, usize, usize), f64>) -> PyResult<LieAlgebra> {
    let mut entries = constants
        .into_iter()
        .map(|((i, j, k), c)| {
            let z = zero_based(&[i, j, k])?;
            Ok((z[0], z[1], z[2], c))
        })
        .collect::<PyResult<Vec<_>>>()?;
    entries.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    LieAlgebra::from_brackets(dim, &entries).map_err(to_py)
}

fn metric(dim: usize, entries: HashMap<(usize, usize), String>) -> PyResult<Metric> {
    let parsed = entries
        .into_iter()
        .map(|((i, j), s)| {
            let z = zero_based(&[i, j])?;
            Ok((z[0], z[1], expr(&s, dim)?))
        })
        .collect::<PyResult<Vec<_>>>()?;
    Metric::from_upper(dim, parsed).map_err(to_py)
}

/// Christoffel symbols `Γ^{ij}_k` of a contravariant connection.
#[pyclass(name = "Connection", frozen)]
struct PyConnection {
    inner: ConnectionSymbols,
}

#[pymethods]
impl PyConnection {
    #[staticmethod]
    fn canonical(pi: &PyPoisson) -> Self {
        PyConnection { inner: connection::canonical_poisson_connection(&pi.inner) }
    }

    #[staticmethod]
    fn flat(dim: usize) -> Self {
        PyConnection { inner: ConnectionSymbols::flat(dim) }
    }

    /// Contravariant connection induced by the Levi-Civita connection of `{(i, j): g_ij}`, `i ≤ j`.
    #[staticmethod]
    fn levi_civita(pi: &PyPoisson, metric_entries: HashMap<(usize, usize), String>) -> PyResult<Self> {
        let g = metric(pi.inner.dim(), metric_entries)?;
        Ok(PyConnection { inner: connection::levi_civita_contra(&pi.inner, &g).map_err(to_py)? })
    }

    #[staticmethod]
    fn explicit(dim: usize, symbols: HashMap<(usize, usize, usize), String>) -> PyResult<Self> {
        let parsed = symbols
            .into_iter()
            .map(|((i, j, k), s)| {
                let z = zero_based(&[i, j, k])?;
                Ok((z[0], z[1], z[2], expr(&s, dim)?))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyConnection { inner: ConnectionSymbols::explicit(dim, parsed).map_err(to_py)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    fn symmetrized(&self, pi: &PyPoisson) -> PyResult<Self> {
        Ok(PyConnection { inner: connection::symmetrize(&pi.inner, &self.inner).map_err(to_py)? })
    }

    fn torsion_residual(&self, pi: &PyPoisson, points: Vec<Vec<f64>>) -> PyResult<f64> {
        connection::torsion(&pi.inner, &self.inner).map_err(to_py)?.max_abs_over(&points).map_err(eval_err)
    }

    fn curvature_residual(&self, pi: &PyPoisson, points: Vec<Vec<f64>>) -> PyResult<f64> {
        connection::curvature(&pi.inner, &self.inner).map_err(to_py)?.max_abs_over(&points).map_err(eval_err)
    }

    fn __repr__(&self) -> String {
        format!("Connection(kind={}, dim={})", self.inner.kind().name(), self.inner.dim())
    }
}

fn config(steps: usize) -> PyResult<IntegratorConfig> {
    IntegratorConfig::new(steps).map_err(to_py)
}

/// Geodesic trajectory as a dict with keys `t`, `x`, `alpha`.
#[pyfunction]
#[pyo3(signature = (pi, conn, x0, alpha0, t_end = 1.0, steps = 1000))]
fn geodesic<'py>(
    py: Python<'py>,
    pi: &PyPoisson,
    conn: &PyConnection,
    x0: Vec<f64>,
    alpha0: Vec<f64>,
    t_end: f64,
    steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let traj = transport::integrate_geodesic(&pi.inner, &conn.inner, &x0, &alpha0, t_end, config(steps)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", traj.t)?;
    d.set_item("x", traj.x)?;
    d.set_item("alpha", traj.alpha)?;
    Ok(d)
}

/// Linear holonomy `(matrix, determinant)` of the cotangent loop with components in `t`.
#[pyfunction]
#[pyo3(signature = (pi, conn, gamma, alpha, steps = 1000))]
fn holonomy(pi: &PyPoisson, conn: &PyConnection, gamma: Vec<String>, alpha: Vec<String>, steps: usize) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let g: Vec<&str> = gamma.iter().map(String::as_str).collect();
    let a: Vec<&str> = alpha.iter().map(String::as_str).collect();
    let path = CotangentPath::parse(&g, &a).map_err(to_py)?;
    let h = transport::linear_holonomy(&pi.inner, &conn.inner, &path, config(steps)?).map_err(to_py)?;
    Ok((h.matrix.to_rows(), h.determinant))
}

/// Components of `λ(Γ¹, Γ⁰)(P_k)` at `point`, keyed by 1-based index tuples.
#[pyfunction]
fn secondary_class<'py>(
    py: Python<'py>,
    pi: &PyPoisson,
    conn1: &PyConnection,
    conn0: &PyConnection,
    k: usize,
    point: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let f = classes::secondary_class(&pi.inner, &conn1.inner, &conn0.inner, k).map_err(to_py)?;
    field_dict(py, &f, &point)
}

#[pyfunction]
fn lie_poisson_mk<'py>(py: Python<'py>, dim: usize, constants: HashMap<(usize, usize, usize), f64>, k: usize) -> PyResult<Bound<'py, PyDict>> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be positive"));
    }
    let g = lie_algebra(dim, constants)?;
    field_dict(py, &classes::lie_poisson_mk(&g, k), &vec![0.0; dim])
}

#[pyfunction]
fn modular_comparison(pi: &PyPoisson, metric_entries: HashMap<(usize, usize), String>, points: Vec<Vec<f64>>) -> PyResult<f64> {
    let g = metric(pi.inner.dim(), metric_entries)?;
    classes::modular_comparison(&pi.inner, &g, &points).map_err(to_py)
}

/// Run the `pg check` battery on a manifest file and return the records as JSON.
#[pyfunction]
#[pyo3(signature = (path, seed = 0))]
fn check_manifest(path: &str, seed: u64) -> PyResult<String> {
    let man = pg_cli::Manifest::load(Path::new(path)).map_err(|e| PyValueError::new_err(e.0))?;
    let records = pg_cli::commands::check(&man, seed).map_err(|e| match e {
        pg_cli::CliError::Input(m) => PyValueError::new_err(m),
        pg_cli::CliError::Compute(m) => PyRuntimeError::new_err(m),
    })?;
    let report = pg_cli::Report {
        command: "check".into(),
        echo: serde_json::json!({ "manifest": path }),
        manifest_sha256: man.sha256.clone(),
        seed,
        records,
    };
    Ok(report.to_json(None).to_string())
}

#[pymodule]
fn pgeom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoisson>()?;
    m.add_class::<PyConnection>()?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(holonomy, m)?)?;
    m.add_function(wrap_pyfunction!(secondary_class, m)?)?;
    m.add_function(wrap_pyfunction!(lie_poisson_mk, m)?)?;
    m.add_function(wrap_pyfunction!(modular_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(check_manifest, m)?)?;
    Ok(())
}
