//! Python module `rlocspace`: parameter classification, corpus membership
//! reports, Whitney diagnostics, the one-dimensional Hardy quotient and the
//! divergence probe. Structured results come back as dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use rloc::decomposition::{corpus, corpus_entry, membership_report, reinforced_divergence_probe, ParamSet};
use rloc::discretize::{halvings, Aabb};
use rloc::hardy::{hardy_quotient_1d, log_window, power_family};
use rloc::whitney::whitney_decompose;
use rloc::{PlaneSplit, SmoothnessParams};

fn py_err(e: rloc::Error) -> PyErr {
    match e {
        rloc::Error::InvalidParameter(_) | rloc::Error::UnknownEntry(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// Criticality class of `(n, l, s, p, q)`, e.g. `critical(r=1)`.
#[pyfunction]
#[pyo3(signature = (n, l, s, p, q = 2.0))]
fn classify(n: usize, l: usize, s: &str, p: &str, q: f64) -> PyResult<String> {
    let split = PlaneSplit::new(n, l).map_err(py_err)?;
    let params = SmoothnessParams::parse(split, s, p, q).map_err(py_err)?;
    Ok(params.classify().to_string())
}

/// Ids of the function corpus.
#[pyfunction]
fn corpus_ids() -> Vec<String> {
    corpus().iter().map(|e| e.id().to_string()).collect()
}

/// Membership report of a corpus entry at a parameter set written as
/// `n=2,l=1,s=3/2,p=2`.
#[pyfunction]
fn membership<'py>(py: Python<'py>, entry: &str, params: &str) -> PyResult<Bound<'py, PyAny>> {
    let e = corpus_entry(entry).map_err(py_err)?;
    let set = ParamSet::parse(params).map_err(py_err)?;
    set.params.require_banach_q().map_err(py_err)?;
    let report = py
        .detach(|| membership_report(&e, &set))
        .map_err(py_err)?;
    serialize(py, &report)
}

/// Invariant diagnostics of the Whitney decomposition of `[-half, half]^n`
/// minus `R^l`.
#[pyfunction]
#[pyo3(signature = (n, l, j_max, half = 1.0))]
fn whitney<'py>(py: Python<'py>, n: usize, l: usize, j_max: u32, half: f64) -> PyResult<Bound<'py, PyAny>> {
    let split = PlaneSplit::new(n, l).map_err(py_err)?;
    let dec = whitney_decompose(split, &Aabb::cube(n, half), j_max).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("cubes", dec.cubes().len())?;
    d.set_item("diagnostics", serialize(py, &dec.verify())?)?;
    Ok(d.into_any())
}

/// `int (|g|/t)^p t^alpha / int |g'|^p t^alpha` for `g = t^beta` on `(0, 1)`.
#[pyfunction]
#[pyo3(signature = (beta, p = 2.0, alpha = 0.0, cells = 6000, depth = 60.0))]
fn power_hardy_quotient(beta: f64, p: f64, alpha: f64, cells: usize, depth: f64) -> PyResult<f64> {
    let grid = log_window(1.0, depth, cells).map_err(py_err)?;
    let g = power_family(beta, &grid).map_err(py_err)?;
    hardy_quotient_1d(&g, p, alpha).map_err(py_err)
}

/// Logarithmic-divergence probe of a corpus entry at `s = (n-l)/p`.
#[pyfunction]
#[pyo3(signature = (entry, n = 2, p = 2.0, resolutions = None))]
fn divergence_probe<'py>(
    py: Python<'py>,
    entry: &str,
    n: usize,
    p: f64,
    resolutions: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let split = PlaneSplit::new(n, n.saturating_sub(1)).map_err(py_err)?;
    let params =
        SmoothnessParams::new(split, split.codim() as f64 / p, p, 2.0).map_err(py_err)?;
    let f = corpus_entry(entry)
        .and_then(|e| e.expr(n))
        .map_err(py_err)?;
    let hs = resolutions.unwrap_or_else(|| {
        if n >= 3 {
            halvings(1.0 / 8.0, 3)
        } else {
            halvings(1.0 / 16.0, 4)
        }
    });
    let record = py
        .detach(|| reinforced_divergence_probe(f.as_ref(), &params, &hs))
        .map_err(py_err)?;
    serialize(py, &record)
}

#[pymodule]
#[pyo3(name = "rlocspace")]
fn rlocspace_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_ids, m)?)?;
    m.add_function(wrap_pyfunction!(membership, m)?)?;
    m.add_function(wrap_pyfunction!(whitney, m)?)?;
    m.add_function(wrap_pyfunction!(power_hardy_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_probe, m)?)?;
    Ok(())
}
