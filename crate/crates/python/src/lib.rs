//! Python bindings: run experiments from TOML, plus a few pure helpers.

use exsc::cli::config::ExperimentConfig;
use exsc::cli::fit::{fit_rate as fit, Abscissa};
use exsc::cli::run::{exit_code, run as run_cmd, Command};
use exsc::cli::verify;
use exsc::equations::preset_by_name;
use exsc::error::Error;
use exsc::null_condition::{flat_transform as flat, is_null as null_check, BilinearFormField};
use exsc::solver::{radial_ode_oracle, Matching};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use std::path::PathBuf;

create_exception!(exsc_py, ExscError, PyException, "Solver failure; `.args[1]` is the CLI exit code.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::BasisMismatch(_) => PyValueError::new_err(e.to_string()),
        other => {
            let code = exit_code(&other);
            ExscError::new_err((other.to_string(), code))
        }
    }
}

fn value_to_py(py: Python<'_>, v: &toml::Value) -> PyResult<PyObject> {
    Ok(match v {
        toml::Value::String(s) => s.into_py(py),
        toml::Value::Integer(i) => i.into_py(py),
        toml::Value::Float(f) => f.into_py(py),
        toml::Value::Boolean(b) => b.into_py(py),
        toml::Value::Datetime(d) => d.to_string().into_py(py),
        toml::Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new_bound(py, items).into_py(py)
        }
        toml::Value::Table(t) => table_to_py(py, t)?.into_py(py),
    })
}

fn table_to_py<'py>(py: Python<'py>, t: &toml::Table) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    for (k, v) in t {
        d.set_item(k, value_to_py(py, v)?)?;
    }
    Ok(d)
}

fn parse_command(name: &str) -> PyResult<Command> {
    Ok(match name {
        "solve-infinity" => Command::SolveInfinity,
        "solve-dirichlet" => Command::SolveDirichlet,
        "solve-zero" => Command::SolveZero,
        "check-null" => Command::CheckNull,
        "probe-null" => Command::ProbeNull,
        "rates" => Command::Rates,
        "verify" => Command::Verify,
        "oracle-radial" => Command::OracleRadial,
        other => return Err(PyValueError::new_err(format!("unknown command '{other}'"))),
    })
}

/// Run a CLI subcommand; returns the result table that is also written to `out/report.toml`.
#[pyfunction]
#[pyo3(signature = (command, out, config=None, seed=None))]
fn run<'py>(py: Python<'py>, command: &str, out: PathBuf, config: Option<&str>, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let cmd = parse_command(command)?;
    let mut cfg = match config {
        Some(text) => ExperimentConfig::from_toml(text).map_err(to_py)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let outcome = py.allow_threads(|| run_cmd(cmd, &cfg, &out)).map_err(to_py)?;
    let d = table_to_py(py, &outcome.results)?;
    d.set_item("verify_failed", outcome.verify_failed)?;
    Ok(d)
}

/// Structural self-checks as (name, value, tolerance, passed) tuples.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn verify_all(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let checks = py.allow_threads(|| verify::run_all(seed)).map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.name, c.value, c.tolerance, c.passed)).collect())
}

/// Flat transform of a constant real 2×2 form, as nested [re, im] pairs.
#[pyfunction]
fn flat_transform(matrix: [[f64; 2]; 2]) -> Vec<Vec<(f64, f64)>> {
    let f = flat(&BilinearFormField::constant_real(matrix)).at(0.0);
    f.iter().map(|row| row.iter().map(|z| (z.re, z.im)).collect()).collect()
}

#[pyfunction]
#[pyo3(signature = (matrix, tol=1e-12))]
fn is_null(matrix: [[f64; 2]; 2], tol: f64) -> bool {
    null_check(&BilinearFormField::constant_real(matrix), tol)
}

/// (ν₁, ν₁ structured, predicted ν) of a named preset.
#[pyfunction]
#[pyo3(signature = (preset, d, p=5, kappa=-1.0))]
fn exponents(preset: &str, d: usize, p: u32, kappa: f64) -> PyResult<(f64, f64, f64)> {
    let e = preset_by_name(preset, d, p, kappa).map_err(to_py)?;
    Ok((e.nu1, e.nu1_structured, e.predicted_nu))
}

/// Log-linear fit; returns (slope, intercept, residual).
#[pyfunction]
#[pyo3(signature = (samples, window, log_radius=true))]
fn fit_rate(samples: Vec<(f64, f64)>, window: (f64, f64), log_radius: bool) -> PyResult<(f64, f64, f64)> {
    let abscissa = if log_radius { Abscissa::LogRadius } else { Abscissa::Linear };
    let f = fit(&samples, window, abscissa).map_err(to_py)?;
    Ok((f.slope, f.intercept, f.residual))
}

/// Radial profile of Δu = κu^p with u(1) = boundary matched to c·r^{2−d} at r_max;
/// returns (c, u at radii).
#[pyfunction]
#[pyo3(signature = (d, p, kappa, boundary, radii, r_max=1e3))]
fn radial_profile(d: usize, p: u32, kappa: f64, boundary: f64, radii: Vec<f64>, r_max: f64) -> PyResult<(f64, Vec<f64>)> {
    let prof = radial_ode_oracle(d, p, kappa, boundary, Matching::Asymptotic { r_max }, &radii).map_err(to_py)?;
    Ok((prof.c, prof.u))
}

#[pymodule]
pub fn exsc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ExscError", m.py().get_type_bound::<ExscError>())?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    m.add_function(wrap_pyfunction!(flat_transform, m)?)?;
    m.add_function(wrap_pyfunction!(is_null, m)?)?;
    m.add_function(wrap_pyfunction!(exponents, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(radial_profile, m)?)?;
    Ok(())
}
