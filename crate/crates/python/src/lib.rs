//! Python bindings. Structured results come back as plain dicts and lists;
//! families stay opaque `Family` objects.

use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use ekrf_core::conditions::{self, CheckOutcome, ConditionSpec, Variant};
use ekrf_core::constructions::{self, BoundKind, BoundParams};
use ekrf_core::error::Error;
use ekrf_core::search::{self, SearchOptions, Symmetry};
use ekrf_core::setcore::{parse_family, serialize_family};
use ekrf_core::structure;
use ekrf_core::{Family, GroundParams, KSet};

fn err(e: Error) -> PyErr {
    match e {
        Error::CapExceeded { .. } => PyOverflowError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn spec(t: u32, ell: Option<u32>, variant: &str, s: u32) -> PyResult<ConditionSpec> {
    let variant: Variant = variant.parse().map_err(err)?;
    match (variant, ell) {
        (Variant::Pairwise, _) => ConditionSpec::pairwise(t),
        (_, Some(ell)) => ConditionSpec::new(t, ell, variant, s),
        (_, None) => {
            return Err(PyValueError::new_err(format!(
                "variant {} needs ell",
                variant.name()
            )))
        }
    }
    .map_err(err)
}

#[pyclass(name = "Family", module = "ekrf", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFamily {
    inner: Family,
}

#[pymethods]
impl PyFamily {
    #[new]
    fn new(n: u32, k: u32, sets: Vec<Vec<u32>>) -> PyResult<Self> {
        let params = GroundParams::new(n, k).map_err(err)?;
        let members = sets.iter().map(|s| KSet::from_elements(s)).collect();
        Ok(PyFamily {
            inner: Family::new(params, members).map_err(err)?,
        })
    }

    /// Parses the line-oriented text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyFamily {
            inner: parse_family(text).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        serialize_family(&self.inner)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.params().n()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.params().k()
    }

    /// Members in lexicographic order, each as a sorted list.
    fn members(&self) -> Vec<Vec<u32>> {
        self.inner.members().iter().map(|m| m.to_vec()).collect()
    }

    fn subfamily(&self, indices: Vec<usize>) -> PyResult<Self> {
        Ok(PyFamily {
            inner: self.inner.subfamily(&indices).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Family(n={}, k={}, members={})",
            self.inner.params().n(),
            self.inner.params().k(),
            self.inner.len()
        )
    }
}

fn wrap(result: ekrf_core::Result<Family>) -> PyResult<PyFamily> {
    result.map(|inner| PyFamily { inner }).map_err(err)
}

#[pyfunction]
fn construct_thm6(n: u32, k: u32, t: u32, ell: u32) -> PyResult<PyFamily> {
    wrap(constructions::construct_thm6(n, k, t, ell))
}

#[pyfunction]
fn construct_thm8(n: u32, k: u32, ell: u32, s: u32) -> PyResult<PyFamily> {
    wrap(constructions::construct_thm8(n, k, ell, s))
}

#[pyfunction]
fn construct_star(n: u32, k: u32, t: u32) -> PyResult<PyFamily> {
    wrap(constructions::construct_star(n, k, t))
}

#[pyfunction]
fn construct_sunflower(n: u32, k: u32, t: u32, u: u32) -> PyResult<PyFamily> {
    wrap(constructions::construct_sunflower(n, k, t, u))
}

/// `(value, witness indices)` of the lightest ℓ-subfamily.
#[pyfunction]
fn min_pairsum(family: &PyFamily, ell: u32) -> PyResult<(i64, Vec<usize>)> {
    let r = conditions::min_pairsum(&family.inner, ell).map_err(err)?;
    Ok((r.value, r.witness))
}

#[pyfunction]
#[pyo3(signature = (t, ell, variant, s = 0))]
fn threshold(t: u32, ell: u32, variant: &str, s: u32) -> PyResult<i64> {
    Ok(spec(t, Some(ell), variant, s)?.threshold())
}

/// `{"status": "ok", ...}` or `{"status": "violation", "indices": ..., ...}`.
#[pyfunction]
#[pyo3(signature = (family, variant, t = 1, ell = None, s = 0))]
fn check_condition<'py>(
    py: Python<'py>,
    family: &PyFamily,
    variant: &str,
    t: u32,
    ell: Option<u32>,
    s: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let outcome =
        conditions::check_condition(&family.inner, &spec(t, ell, variant, s)?).map_err(err)?;
    let value = match outcome {
        CheckOutcome::Satisfied {
            min_pairsum,
            threshold,
        } => {
            serde_json::json!({"status": "ok", "min_pairsum": min_pairsum, "threshold": threshold})
        }
        CheckOutcome::Violated(v) => serde_json::json!({
            "status": "violation",
            "indices": v.indices,
            "pair_sum": v.pair_sum,
            "threshold": v.threshold,
        }),
    };
    to_py(py, &value)
}

#[pyfunction]
fn f_profile<'py>(py: Python<'py>, t: u32, ell: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &constructions::f_profile(t, ell).map_err(err)?)
}

#[pyfunction]
fn g_profile<'py>(py: Python<'py>, ell: u32, s: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &constructions::g_profile(ell, s).map_err(err)?)
}

/// Exact bound as a Python int.
#[pyfunction]
#[pyo3(signature = (kind, n, k, t = 1, ell = 3, s = 0))]
fn rhs_bound<'py>(
    py: Python<'py>,
    kind: &str,
    n: u32,
    k: u32,
    t: u32,
    ell: u32,
    s: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: BoundKind = kind.parse().map_err(err)?;
    let value =
        constructions::rhs_bound(kind, &BoundParams::new(n, k).t(t).ell(ell).s(s)).map_err(err)?;
    py.import("builtins")?
        .getattr("int")?
        .call1((value.to_string(),))
}

#[pyfunction]
#[pyo3(signature = (
    n, k, variant, t = 1, ell = None, s = 0,
    time_limit = 0.0, node_cap = None, incumbent = None, symmetry = "none"
))]
#[allow(clippy::too_many_arguments)]
fn max_family<'py>(
    py: Python<'py>,
    n: u32,
    k: u32,
    variant: &str,
    t: u32,
    ell: Option<u32>,
    s: u32,
    time_limit: f64,
    node_cap: Option<u64>,
    incumbent: Option<&PyFamily>,
    symmetry: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let params = GroundParams::new(n, k).map_err(err)?;
    let spec = spec(t, ell, variant, s)?;
    let opts = SearchOptions {
        time_limit,
        node_cap,
        incumbent: incumbent.map(|f| f.inner.clone()),
        symmetry: symmetry.parse::<Symmetry>().map_err(err)?,
        ..Default::default()
    };
    let result = py
        .detach(|| search::max_family(params, &spec, &opts))
        .map_err(err)?;
    to_py(py, &result)
}

#[pyfunction]
fn matching_number<'py>(py: Python<'py>, family: &PyFamily) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &structure::matching_number(&family.inner))
}

/// The first sunflower found, or `None`.
#[pyfunction]
fn find_sunflower<'py>(
    py: Python<'py>,
    family: &PyFamily,
    t: u32,
    u: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &structure::find_sunflower(&family.inner, t, u).map_err(err)?,
    )
}

/// Index-free summary: the kernel plus the part sizes.
#[pyfunction]
fn kernel_decompose<'py>(
    py: Python<'py>,
    family: &PyFamily,
    kernel: Vec<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let d =
        structure::kernel_decompose(&family.inner, KSet::from_elements(&kernel)).map_err(err)?;
    let minus: serde_json::Map<String, serde_json::Value> = d
        .f_minus
        .iter()
        .map(|(e, f)| (e.to_string(), f.len().into()))
        .collect();
    let value = serde_json::json!({
        "kernel": d.kernel.to_vec(),
        "f_t": d.f_t.len(),
        "f_minus": minus,
        "leftover": d.leftover.len(),
    });
    to_py(py, &value)
}

#[pyfunction]
fn lemma_audit<'py>(
    py: Python<'py>,
    family: &PyFamily,
    t: u32,
    ell: u32,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &structure::lemma_audit(&family.inner, t, ell).map_err(err)?,
    )
}

#[pymodule]
fn ekrf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(construct_thm6, m)?)?;
    m.add_function(wrap_pyfunction!(construct_thm8, m)?)?;
    m.add_function(wrap_pyfunction!(construct_star, m)?)?;
    m.add_function(wrap_pyfunction!(construct_sunflower, m)?)?;
    m.add_function(wrap_pyfunction!(min_pairsum, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(check_condition, m)?)?;
    m.add_function(wrap_pyfunction!(f_profile, m)?)?;
    m.add_function(wrap_pyfunction!(g_profile, m)?)?;
    m.add_function(wrap_pyfunction!(rhs_bound, m)?)?;
    m.add_function(wrap_pyfunction!(max_family, m)?)?;
    m.add_function(wrap_pyfunction!(matching_number, m)?)?;
    m.add_function(wrap_pyfunction!(find_sunflower, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_audit, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
