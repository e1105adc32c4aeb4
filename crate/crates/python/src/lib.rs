//! Python bindings for `aba_persuasion`.
//!
//! Instances and schemes are wrapped as classes; solver reports come back as
//! `Report` objects whose `to_json` matches the CLI output byte for byte.

use std::collections::BTreeMap;

use aba_persuasion as core;
use aba_persuasion::exact::{solve_exact, ExactOptions};
use aba_persuasion::fptas::{fptas_a_const, fptas_eb_const, FptasOptions};
use aba_persuasion::io::{instance_to_json, parse_instance, parse_instance_str, parse_scheme_str, report_to_json, scheme_to_json};
use aba_persuasion::oracle::{cross_belief_utilities, deviation_check, oracle_optimal};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Parse(_) | core::Error::Validation(_) | core::Error::Io(_) | core::Error::InvalidArgument(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Instance", module = "aba_persuasion", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyInstance {
    inner: core::Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: parse_instance_str(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: parse_instance(path).map_err(to_py)? })
    }

    /// `(events, alice_signals, bob_signals)` sizes.
    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        self.inner.prior.dims()
    }

    #[getter]
    fn prior(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.prior.to_nested()
    }

    #[getter]
    fn alice_labels(&self) -> Vec<String> {
        self.inner.spaces.alice.clone()
    }

    fn to_json(&self) -> String {
        instance_to_json(&self.inner)
    }

    /// Total market value V.
    fn value(&self) -> PyResult<f64> {
        core::total_value_v(&self.inner.prior, &self.inner.score).map_err(to_py)
    }

    fn bob_utility(&self, scheme: &PyScheme) -> PyResult<f64> {
        scheme.inner.validate_against(&self.inner.prior).map_err(to_py)?;
        core::bob_utility_of_scheme(&self.inner.prior, &self.inner.score, &scheme.inner).map_err(to_py)
    }

    fn alice_utility(&self, scheme: &PyScheme) -> PyResult<f64> {
        scheme.inner.validate_against(&self.inner.prior).map_err(to_py)?;
        core::alice_total_utility(&self.inner.prior, &self.inner.score, &scheme.inner).map_err(to_py)
    }

    fn full_reveal(&self) -> PyScheme {
        PyScheme {
            inner: core::SignalingScheme::full_reveal(&self.inner.prior, &self.inner.spaces.alice),
        }
    }

    fn no_reveal(&self) -> PyScheme {
        PyScheme {
            inner: core::SignalingScheme::no_reveal(&self.inner.prior),
        }
    }

    #[pyo3(signature = (cap_lp_vars=None))]
    fn solve_exact(&self, cap_lp_vars: Option<u128>) -> PyResult<PyReport> {
        let mut o = ExactOptions::default();
        if let Some(c) = cap_lp_vars {
            o.cap_lp_vars = c;
        }
        let r = solve_exact(&self.inner.prior, &self.inner.score, &o).map_err(to_py)?;
        Ok(PyReport { inner: r })
    }

    #[pyo3(signature = (delta, cap_grid_points=None))]
    fn fptas_a(&self, delta: f64, cap_grid_points: Option<u128>) -> PyResult<PyReport> {
        let o = fptas_options(cap_grid_points);
        let r = fptas_a_const(&self.inner.prior, &self.inner.score, delta, &o).map_err(to_py)?;
        Ok(PyReport { inner: r })
    }

    #[pyo3(signature = (delta, eta=None, cap_grid_points=None))]
    fn fptas_eb(&self, delta: f64, eta: Option<f64>, cap_grid_points: Option<u128>) -> PyResult<PyReport> {
        let o = fptas_options(cap_grid_points);
        let r = fptas_eb_const(&self.inner.prior, &self.inner.score, delta, eta, &o).map_err(to_py)?;
        Ok(PyReport { inner: r })
    }

    #[pyo3(signature = (grid_step=0.02, max_signals=2))]
    fn oracle(&self, grid_step: f64, max_signals: usize) -> PyResult<PyReport> {
        let r = oracle_optimal(&self.inner.prior, &self.inner.score, grid_step, max_signals).map_err(to_py)?;
        Ok(PyReport { inner: r })
    }

    /// `"Substitutes"`, `"Complements"` or `"Indifferent"`.
    fn classify(&self) -> PyResult<String> {
        Ok(self.solve_exact(None)?.inner.classification.to_string())
    }

    /// Payoffs when Bob believes `believed` but Alice draws from `actual`.
    fn cross_belief(&self, believed: &PyScheme, actual: &PyScheme) -> PyResult<BTreeMap<String, f64>> {
        let c = cross_belief_utilities(&self.inner.prior, &self.inner.score, &believed.inner, &actual.inner)
            .map_err(to_py)?;
        Ok(BTreeMap::from([
            ("bob_utility".to_string(), c.bob_utility),
            ("alice_utility".to_string(), c.alice_utility),
            ("off_path_mass".to_string(), c.off_path_mass),
            ("divergence_mass".to_string(), c.divergence_mass),
        ]))
    }

    /// Returns `(passed, values)` for the deviation chain of `pi` against `pi_star`.
    fn deviation_check(&self, pi: &PyScheme, pi_star: &PyScheme) -> PyResult<(bool, BTreeMap<String, f64>)> {
        let r = deviation_check(&self.inner.prior, &self.inner.score, &pi.inner, &pi_star.inner).map_err(to_py)?;
        Ok((r.passed, r.values))
    }
}

fn fptas_options(cap: Option<u128>) -> FptasOptions {
    let mut o = FptasOptions::default();
    if let Some(c) = cap {
        o.cap_grid_points = c;
    }
    o
}

#[pyclass(name = "Scheme", module = "aba_persuasion", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyScheme {
    inner: core::SignalingScheme,
}

#[pymethods]
impl PyScheme {
    #[new]
    fn new(labels: Vec<String>, pi: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyScheme {
            inner: core::SignalingScheme::new(labels, pi).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyScheme { inner: parse_scheme_str(text).map_err(to_py)? })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    #[getter]
    fn pi(&self) -> Vec<Vec<f64>> {
        self.inner.pi.clone()
    }

    fn to_json(&self) -> String {
        scheme_to_json(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.n_signals()
    }
}

#[pyclass(name = "Report", module = "aba_persuasion", frozen)]
pub struct PyReport {
    inner: core::SolveReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn method(&self) -> String {
        self.inner.method.to_string()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.sender_objective
    }

    #[getter]
    fn bob_utility(&self) -> f64 {
        self.inner.bob_utility
    }

    #[getter]
    fn alice_utility(&self) -> f64 {
        self.inner.alice_utility()
    }

    #[getter(V)]
    fn total_value(&self) -> f64 {
        self.inner.total_value_v
    }

    #[getter]
    fn classification(&self) -> String {
        self.inner.classification.to_string()
    }

    #[getter]
    fn scheme(&self) -> PyScheme {
        PyScheme {
            inner: self.inner.scheme.clone(),
        }
    }

    #[getter]
    fn diagnostics(&self) -> BTreeMap<String, f64> {
        self.inner.diagnostics.clone()
    }

    fn to_json(&self) -> String {
        report_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(method={}, bob_utility={:.6}, classification={})",
            self.inner.method, self.inner.bob_utility, self.inner.classification
        )
    }
}

#[pymodule]
fn aba_persuasion_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyReport>()?;
    Ok(())
}
