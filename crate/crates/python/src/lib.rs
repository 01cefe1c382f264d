//! Python bindings. Parameters go in and results come out as JSON text,
//! the same documents the CLI reads and writes.

use elliptic_lattice::checks::run_suite;
use elliptic_lattice::io::{g1_report, m1_report, to_json};
use elliptic_lattice::{check_branch, spectrum as run_spectrum, validate as run_validate, CouplingParams, Error, SpectralOptions, ThetaContext};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_) | Error::Domain(_) | Error::Branch(_) | Error::Pole(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse(params_json: &str) -> PyResult<CouplingParams> {
    CouplingParams::from_json(params_json).map_err(py_err)
}

fn checked(params_json: &str) -> PyResult<CouplingParams> {
    let params = parse(params_json)?;
    check_branch(&params).map_err(py_err)?;
    let report = run_validate(&params);
    if !report.valid {
        return Err(PyValueError::new_err(format!("invalid parameters: {}", report.violations.join("; "))));
    }
    Ok(params)
}

/// Validation report as JSON; never raises for out-of-domain values.
#[pyfunction]
fn validate(params_json: &str) -> PyResult<String> {
    to_json(&run_validate(&parse(params_json)?)).map_err(py_err)
}

#[pyfunction]
fn spectrum(params_json: &str) -> PyResult<String> {
    let params = checked(params_json)?;
    let (_, result) = run_spectrum(&params, &SpectralOptions::default()).map_err(py_err)?;
    to_json(&result).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (params_json, seed = 0))]
fn verify(params_json: &str, seed: u64) -> PyResult<String> {
    let params = checked(params_json)?;
    let report = run_suite(&params, &SpectralOptions::default(), seed).map_err(py_err)?;
    to_json(&report).map_err(py_err)
}

#[pyfunction]
fn special_m1(params_json: &str) -> PyResult<String> {
    let params = checked(params_json)?;
    to_json(&m1_report(&params, &SpectralOptions::default()).map_err(py_err)?).map_err(py_err)
}

#[pyfunction]
fn special_g1(params_json: &str) -> PyResult<String> {
    let params = checked(params_json)?;
    to_json(&g1_report(&params, &SpectralOptions::default()).map_err(py_err)?).map_err(py_err)
}

/// Reduced theta bracket `[z]_r` at scale `alpha` and nome `p`.
#[pyfunction]
fn bracket(z: f64, r: usize, alpha: f64, p: f64) -> PyResult<f64> {
    ThetaContext::new(alpha, p).and_then(|ctx| ctx.bracket(z, r)).map_err(py_err)
}

#[pymodule]
fn elliptic_lattice_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(special_m1, m)?)?;
    m.add_function(wrap_pyfunction!(special_g1, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    Ok(())
}
