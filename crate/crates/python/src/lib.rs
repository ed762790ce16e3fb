//! Python module `poisson_girsanov`.
//!
//! Rationals cross the boundary as `"p/q"` strings; reports come back as
//! plain dicts and lists.

use num_bigint::BigInt;
use poisson_girsanov::combinatorics;
use poisson_girsanov::exact::{parse_rational, to_exact_string, to_f64};
use poisson_girsanov::finite_oracle::{run_check, CellSpace, OracleCheck, OracleOptions};
use poisson_girsanov::geometry::{self, Point};
use poisson_girsanov::mc::{self, Functional, McConfig};
use poisson_girsanov::moments::{self, StepFunction};
use poisson_girsanov::polynomials;
use poisson_girsanov::report::CheckReport;
use poisson_girsanov::{Error, ExactRational};
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Argument(_) | Error::Parse { .. } | Error::Size(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Domain(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rational(s: &str) -> PyResult<ExactRational> {
    parse_rational(s).map_err(py_err)
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn reports_to_py(py: Python<'_>, reports: &[CheckReport]) -> PyResult<Py<PyAny>> {
    to_py(py, &reports)
}

/// Shift vector of the hull transformation; `|u| < 1/4`.
#[pyclass(name = "HullTransform", frozen, from_py_object)]
#[derive(Clone)]
struct PyHullTransform {
    inner: geometry::HullTransform,
}

#[pymethods]
impl PyHullTransform {
    #[new]
    fn new(ux: f64, uy: f64) -> PyResult<Self> {
        Ok(Self {
            inner: geometry::HullTransform::new([ux, uy]).map_err(py_err)?,
        })
    }

    #[getter]
    fn u(&self) -> (f64, f64) {
        let u = self.inner.u();
        (u[0], u[1])
    }

    /// Bound on `|φ|` for this shift.
    fn phi_bound(&self) -> f64 {
        geometry::phi_sup(&self.inner)
    }

    fn __repr__(&self) -> String {
        let u = self.inner.u();
        format!("HullTransform({}, {})", u[0], u[1])
    }
}

/// Finite point set in `[-1, 1]²`.
#[pyclass(name = "PointConfiguration", frozen, from_py_object)]
#[derive(Clone)]
struct PyConfiguration {
    inner: geometry::PointConfiguration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        let pts = points.into_iter().map(|(x, y)| [x, y]).collect();
        Ok(Self {
            inner: geometry::PointConfiguration::new(pts).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn sample(rate: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: geometry::sample_ppp(rate, seed).map_err(py_err)?,
        })
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points().iter().map(|p| (p[0], p[1])).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Counterclockwise hull vertices.
    fn hull(&self) -> Vec<(f64, f64)> {
        geometry::convex_hull(&self.inner)
            .vertices()
            .iter()
            .map(|p| (p[0], p[1]))
            .collect()
    }

    fn tau(&self, x: (f64, f64), u: &PyHullTransform) -> (f64, f64) {
        let y = geometry::tau(&self.inner, &[x.0, x.1], &u.inner);
        (y[0], y[1])
    }

    /// All points mapped through `τ`.
    fn push_forward(&self, u: &PyHullTransform) -> Vec<(f64, f64)> {
        geometry::push_forward(&self.inner, &u.inner)
            .into_iter()
            .map(|p| (p[0], p[1]))
            .collect()
    }

    /// `(φ(ω, x), on_medial_axis)`.
    fn density_phi(&self, x: (f64, f64), u: &PyHullTransform) -> (f64, bool) {
        let p: Point = [x.0, x.1];
        let v = geometry::density_phi(&self.inner, &p, &u.inner);
        (v.value, v.flagged)
    }

    fn girsanov_density(
        &self,
        py: Python<'_>,
        u: &PyHullTransform,
        rate: f64,
        quad_n: usize,
    ) -> PyResult<Py<PyAny>> {
        let d = mc::girsanov_density(&self.inner, &u.inner, rate, quad_n).map_err(py_err)?;
        to_py(py, &d)
    }

    fn __repr__(&self) -> String {
        format!("PointConfiguration(<{} points>)", self.inner.len())
    }
}

#[pyfunction]
fn stirling_first(n: usize, k: usize) -> PyResult<BigInt> {
    combinatorics::stirling_first(n, k).map_err(py_err)
}

#[pyfunction]
fn stirling_second(n: usize, k: usize) -> PyResult<BigInt> {
    combinatorics::stirling_second(n, k).map_err(py_err)
}

#[pyfunction]
fn stirling_s2_assoc(n: usize, a: usize) -> PyResult<BigInt> {
    combinatorics::stirling_s2_assoc(n, a).map_err(py_err)
}

/// True when every combinatorial identity holds for indices up to `max_n`.
#[pyfunction]
fn check_identities(max_n: usize) -> PyResult<bool> {
    let mut r = combinatorics::check_identity_inv(max_n).map_err(py_err)?;
    r.extend(combinatorics::check_identity_id_fd(max_n).map_err(py_err)?);
    r.extend(combinatorics::check_lemma_ll_all(max_n).map_err(py_err)?);
    Ok(r.all_hold())
}

/// `Cₙ(x, λ)` as an exact string.
#[pyfunction]
fn charlier(n: usize, x: &str, lam: &str) -> PyResult<String> {
    Ok(to_exact_string(
        &polynomials::charlier(n).eval(&rational(x)?, &rational(lam)?),
    ))
}

/// `Bₙ(y, λ)` as an exact string.
#[pyfunction]
fn gen_bell(n: usize, y: &str, lam: &str) -> PyResult<String> {
    Ok(to_exact_string(
        &polynomials::gen_bell(n).eval(&rational(y)?, &rational(lam)?),
    ))
}

#[pyfunction]
fn check_duality(n: usize) -> bool {
    polynomials::check_duality(n).holds()
}

#[pyfunction]
fn central_poisson_moment(n: usize, lam: &str) -> PyResult<String> {
    Ok(to_exact_string(
        &moments::central_poisson_moment(n, &rational(lam)?).map_err(py_err)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (n, lam, trunc = None))]
fn charlier_mean(n: usize, lam: f64, trunc: Option<usize>) -> PyResult<f64> {
    let k = trunc.unwrap_or_else(|| moments::charlier_truncation(n, lam));
    moments::charlier_mean(n, lam, k).map_err(py_err)
}

/// `E[δ(h)^n]` by the three formulas, `h` given as `[(value, mass), ...]`.
#[pyfunction]
fn step_moments(py: Python<'_>, cells: Vec<(String, String)>, n: usize) -> PyResult<Py<PyAny>> {
    let cells = cells
        .iter()
        .map(|(c, m)| Ok((rational(c)?, rational(m)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let h = StepFunction::new(cells).map_err(py_err)?;
    let mut out = serde_json::Map::new();
    out.insert(
        "recursive".into(),
        to_exact_string(&moments::moment_recursive(&h, n)).into(),
    );
    out.insert(
        "closed".into(),
        to_exact_string(&moments::moment_closed(&h, n)).into(),
    );
    if n <= moments::MAX_CUMULANT_ORDER {
        let c = moments::moment_cumulant(&h, n).map_err(py_err)?;
        out.insert("cumulant".into(), to_exact_string(&c).into());
        out.insert("decimal".into(), to_f64(&c).into());
    }
    to_py(py, &out)
}

/// Rows of one finite-oracle check family over the built-in catalog.
#[pyfunction]
#[pyo3(signature = (check, sigma, trunc = None, exact = false))]
fn oracle(
    py: Python<'_>,
    check: &str,
    sigma: Vec<String>,
    trunc: Option<usize>,
    exact: bool,
) -> PyResult<Py<PyAny>> {
    let check = OracleCheck::parse(check).map_err(py_err)?;
    let sigma = sigma
        .iter()
        .map(|s| rational(s))
        .collect::<PyResult<Vec<_>>>()?;
    let k = trunc.unwrap_or_else(|| check.default_trunc());
    let space = CellSpace::new(sigma, k).map_err(py_err)?;
    let rows = run_check(check, &space, OracleOptions { exact }).map_err(py_err)?;
    let reports: Vec<CheckReport> = rows.iter().map(|r| r.to_report()).collect();
    reports_to_py(py, &reports)
}

#[pyfunction]
#[pyo3(signature = (samples, k_max, seed, rate, u))]
fn check_nilpotence(
    py: Python<'_>,
    samples: usize,
    k_max: usize,
    seed: u64,
    rate: f64,
    u: &PyHullTransform,
) -> PyResult<Py<PyAny>> {
    let r = py
        .detach(|| geometry::check_nilpotence(samples, k_max, seed, rate, &u.inner))
        .map_err(py_err)?;
    to_py(py, &r)
}

fn config(
    rate: f64,
    u: (f64, f64),
    n_samples: usize,
    seed: u64,
    quad_n: usize,
    threads: Option<usize>,
) -> PyResult<McConfig> {
    let mut cfg = McConfig::new(rate, [u.0, u.1], n_samples, seed, quad_n).map_err(py_err)?;
    cfg.threads = threads;
    Ok(cfg)
}

/// Monte Carlo estimate of `E[density] = 1`.
#[pyfunction]
#[pyo3(signature = (rate, u, n_samples, seed, quad_n = 128, threads = None))]
fn verify_girsanov_unit(
    py: Python<'_>,
    rate: f64,
    u: (f64, f64),
    n_samples: usize,
    seed: u64,
    quad_n: usize,
    threads: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let cfg = config(rate, u, n_samples, seed, quad_n, threads)?;
    let run = py
        .detach(|| mc::verify_girsanov_unit(&cfg))
        .map_err(py_err)?;
    to_py(py, &run.report)
}

/// Transformed and plain estimates of `E[F]` for `F` in `f1`, `f2`, `f3`.
#[pyfunction]
#[pyo3(signature = (functional, rate, u, n_samples, seed, quad_n = 128, threads = None))]
#[allow(clippy::too_many_arguments)]
fn verify_girsanov_functional(
    py: Python<'_>,
    functional: &str,
    rate: f64,
    u: (f64, f64),
    n_samples: usize,
    seed: u64,
    quad_n: usize,
    threads: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let f: Functional = Functional::parse(functional)
        .map_err(py_err)?
        .ok_or_else(|| PyValueError::new_err("functional must be f1, f2 or f3"))?;
    let cfg = config(rate, u, n_samples, seed, quad_n, threads)?;
    let r = py
        .detach(|| mc::verify_girsanov_functional(f, &cfg))
        .map_err(py_err)?;
    to_py(py, &r)
}

#[pymodule]
#[pyo3(name = "poisson_girsanov")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHullTransform>()?;
    m.add_class::<PyConfiguration>()?;
    m.add_function(wrap_pyfunction!(stirling_first, m)?)?;
    m.add_function(wrap_pyfunction!(stirling_second, m)?)?;
    m.add_function(wrap_pyfunction!(stirling_s2_assoc, m)?)?;
    m.add_function(wrap_pyfunction!(check_identities, m)?)?;
    m.add_function(wrap_pyfunction!(charlier, m)?)?;
    m.add_function(wrap_pyfunction!(gen_bell, m)?)?;
    m.add_function(wrap_pyfunction!(check_duality, m)?)?;
    m.add_function(wrap_pyfunction!(central_poisson_moment, m)?)?;
    m.add_function(wrap_pyfunction!(charlier_mean, m)?)?;
    m.add_function(wrap_pyfunction!(step_moments, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(check_nilpotence, m)?)?;
    m.add_function(wrap_pyfunction!(verify_girsanov_unit, m)?)?;
    m.add_function(wrap_pyfunction!(verify_girsanov_functional, m)?)?;
    Ok(())
}
