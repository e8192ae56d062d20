//! Python bindings for `tpp_depth`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tpp_depth::analysis::{self, Method};
use tpp_depth::depth;
use tpp_depth::io::{params_from_json, params_to_json};
use tpp_depth::simulate::{simulate as run_simulation, ProcessKind, SimConfig};
use tpp_depth::{EventSequence, SampleSet};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sequence(times: Vec<f64>, start: f64) -> PyResult<EventSequence> {
    EventSequence::new(start, times).map_err(value_error)
}

fn sample(rows: Vec<Vec<f64>>, start: f64) -> PyResult<SampleSet> {
    SampleSet::from_rows(start, rows).map_err(value_error)
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(value_error)
}

/// Fitted or user-supplied depth parameters.
#[pyclass(name = "DepthParams", module = "tpp_depth_py", frozen)]
struct PyDepthParams {
    inner: depth::DepthParams,
}

#[pymethods]
impl PyDepthParams {
    #[new]
    #[pyo3(signature = (start, mu_last, var_last, u_bar, big_m=None))]
    fn new(start: f64, mu_last: f64, var_last: f64, u_bar: Vec<f64>, big_m: Option<f64>) -> PyResult<Self> {
        let mut inner = depth::DepthParams::from_moments(start, mu_last, var_last, u_bar).map_err(value_error)?;
        if let Some(m) = big_m {
            inner = inner.with_big_m(m).map_err(value_error)?;
        }
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = params_from_json(text, "<python>".as_ref()).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        params_to_json(&self.inner)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn start(&self) -> f64 {
        self.inner.start
    }

    #[getter]
    fn mu_last(&self) -> f64 {
        self.inner.mu_last
    }

    #[getter]
    fn var_last(&self) -> f64 {
        self.inner.var_last
    }

    #[getter]
    fn u_bar(&self) -> Vec<f64> {
        self.inner.u_bar.clone()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn big_m(&self) -> f64 {
        self.inner.big_m
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.inner.center.clone()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "DepthParams(k={}, start={}, mu_last={}, var_last={}, u_bar={:?})",
            p.k, p.start, p.mu_last, p.var_last, p.u_bar
        )
    }
}

#[pyfunction]
#[pyo3(signature = (rows, start=0.0))]
fn fit_params(rows: Vec<Vec<f64>>, start: f64) -> PyResult<PyDepthParams> {
    let inner = tpp_depth::fit_params(&sample(rows, start)?).map_err(value_error)?;
    Ok(PyDepthParams { inner })
}

/// Returns the depth together with its marginal and conditional parts.
#[pyfunction]
fn product_depth<'py>(py: Python<'py>, times: Vec<f64>, params: &PyDepthParams) -> PyResult<Bound<'py, PyDict>> {
    let seq = sequence(times, params.inner.start)?;
    let b = depth::product_depth(&seq, &params.inner).map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("omega", b.omega)?;
    out.set_item("exponent", b.exponent)?;
    out.set_item("marginal_factor", b.marginal_factor)?;
    out.set_item("conditional", b.conditional)?;
    out.set_item("product", b.product)?;
    Ok(out)
}

#[pyfunction]
fn conditional_depth(times: Vec<f64>, params: &PyDepthParams) -> PyResult<f64> {
    let seq = sequence(times, params.inner.start)?;
    depth::conditional_depth(&seq, &params.inner).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (times, start=0.0))]
fn hpp_conditional_depth(times: Vec<f64>, start: f64) -> PyResult<f64> {
    Ok(depth::hpp_conditional_depth(&sequence(times, start)?))
}

#[pyfunction]
fn marginal_factor(last_time: f64, params: &PyDepthParams) -> PyResult<f64> {
    depth::marginal_factor(last_time, &params.inner).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (times, mean, covariance, start=0.0))]
fn mahalanobis_depth(times: Vec<f64>, mean: Vec<f64>, covariance: Vec<Vec<f64>>, start: f64) -> PyResult<f64> {
    depth::mahalanobis_depth(&sequence(times, start)?, &mean, &covariance).map_err(value_error)
}

/// Simulates `n` realizations. `kind` is `"hpp"` or `"state-dependent"`.
#[pyfunction]
#[pyo3(signature = (kind, rates, n, k=None, seed=0, start=0.0))]
fn simulate(
    kind: &str,
    rates: Vec<f64>,
    n: usize,
    k: Option<usize>,
    seed: u64,
    start: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let kind = match kind {
        "hpp" => ProcessKind::Hpp,
        "state-dependent" => ProcessKind::StateDependent,
        other => return Err(value_error(format!("unknown process kind {other:?}"))),
    };
    let config = SimConfig {
        kind,
        k: k.unwrap_or(rates.len()),
        rates,
        n,
        start,
        seed,
    };
    let sample = run_simulation(&config).map_err(value_error)?;
    Ok(sample.iter().map(|s| s.times().to_vec()).collect())
}

#[pyfunction]
#[pyo3(signature = (rows, params, method="product"))]
fn depth_values(rows: Vec<Vec<f64>>, params: &PyDepthParams, method: &str) -> PyResult<Vec<f64>> {
    let sample = sample(rows, params.inner.start)?;
    let method = parse_method(method)?;
    let baseline = match method {
        Method::Mahalanobis => Some(
            tpp_depth::fit_mahalanobis(&sample)
                .and_then(|f| f.model())
                .map_err(value_error)?,
        ),
        _ => None,
    };
    analysis::depth_values(&sample, &params.inner, method, baseline.as_ref()).map_err(value_error)
}

/// Competition ranks (1 = deepest) in input order.
#[pyfunction]
#[pyo3(signature = (rows, params, method="product"))]
fn rank(rows: Vec<Vec<f64>>, params: &PyDepthParams, method: &str) -> PyResult<Vec<usize>> {
    let sample = sample(rows, params.inner.start)?;
    let table = analysis::rank(&sample, &params.inner, parse_method(method)?).map_err(value_error)?;
    Ok(table.ranks_by_index())
}

#[pyfunction]
#[pyo3(signature = (params, trials=10_000, seed=0, reference=None))]
fn verify_properties<'py>(
    py: Python<'py>,
    params: &PyDepthParams,
    trials: usize,
    seed: u64,
    reference: Option<Vec<Vec<f64>>>,
) -> PyResult<Bound<'py, PyDict>> {
    let reference = reference.map(|rows| sample(rows, params.inner.start)).transpose()?;
    let report = analysis::verify_properties(&params.inner, trials, seed, reference.as_ref())
        .map_err(value_error)?;
    let checks = PyDict::new(py);
    for c in &report.checks {
        let entry = PyDict::new(py);
        entry.set_item("trials", c.trials)?;
        entry.set_item("violations", c.violations)?;
        entry.set_item("worst_margin", c.worst_margin)?;
        entry.set_item("tolerance", c.tolerance)?;
        entry.set_item("passed", c.passed())?;
        checks.set_item(&c.name, entry)?;
    }
    let out = PyDict::new(py);
    out.set_item("seed", report.seed)?;
    out.set_item("trials", report.trials)?;
    out.set_item("passed", report.passed())?;
    out.set_item("checks", checks)?;
    Ok(out)
}

#[pymodule]
fn tpp_depth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDepthParams>()?;
    m.add_function(wrap_pyfunction!(fit_params, m)?)?;
    m.add_function(wrap_pyfunction!(product_depth, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_depth, m)?)?;
    m.add_function(wrap_pyfunction!(hpp_conditional_depth, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_factor, m)?)?;
    m.add_function(wrap_pyfunction!(mahalanobis_depth, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(depth_values, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(verify_properties, m)?)?;
    Ok(())
}
