use magnetic_ncg::algebra::MagneticElement;
use magnetic_ncg::cocycle;
use magnetic_ncg::laguerre::MagneticLength;
use magnetic_ncg::report::{self, Invariant, RunConfig};
use magnetic_ncg::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    if report::exit_code(&e) == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn config_from(config: Option<&Bound<'_, PyDict>>) -> PyResult<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(d) = config {
        for (k, v) in d.iter() {
            let key: String = k.extract()?;
            let value = match v.extract::<Vec<usize>>() {
                Ok(list) => list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
                Err(_) => v.str()?.to_string(),
            };
            c.set(&key, &value).map_err(to_py)?;
        }
    }
    Ok(c)
}

/// Accepts `"pi:j"`, `"pi-sum:j..k"`, a JSON file path, or `[(j, k, re, im), ...]`.
fn element(obj: &Bound<'_, PyAny>, lb: f64) -> PyResult<MagneticElement> {
    let lb = MagneticLength::new(lb).map_err(to_py)?;
    if let Ok(s) = obj.extract::<String>() {
        return report::parse_element(&s, lb).map_err(to_py);
    }
    let coeffs: Vec<(usize, usize, f64, f64)> = obj.extract()?;
    MagneticElement::from_coeffs(coeffs.into_iter().map(|(j, k, re, im)| (j, k, Complex64::new(re, im))), lb).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, lb = 1.0))]
fn gap_label(p: &Bound<'_, PyAny>, lb: f64) -> PyResult<f64> {
    cocycle::gap_label(&element(p, lb)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, lb = 1.0))]
fn chern_number(p: &Bound<'_, PyAny>, lb: f64) -> PyResult<f64> {
    cocycle::chern_number(&element(p, lb)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (a0, a1, a2, lb = 1.0))]
fn psi(a0: &Bound<'_, PyAny>, a1: &Bound<'_, PyAny>, a2: &Bound<'_, PyAny>, lb: f64) -> PyResult<Complex64> {
    Ok(cocycle::psi(&element(a0, lb)?, &element(a1, lb)?, &element(a2, lb)?).map_err(to_py)?.value)
}

/// One invariant as a JSON report; `which` is one of gap-label, chern,
/// nc-integral, psi, ch, tau2.
#[pyfunction]
#[pyo3(signature = (which, input, config = None))]
fn invariant(which: &str, input: &str, config: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let c = config_from(config)?;
    let which: Invariant = serde_json::from_value(serde_json::Value::String(which.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown invariant {which:?}")))?;
    let r = report::invariant_report(&c, which, input).map_err(to_py)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Ladder points `[(N, sigma_N)]` with the extrapolated value and its error.
#[pyfunction]
#[pyo3(signature = (target, config = None))]
fn dixmier_ladder(target: &str, config: Option<&Bound<'_, PyDict>>) -> PyResult<(Vec<(usize, Complex64)>, Complex64, f64)> {
    let e = report::dixmier_ladder(&config_from(config)?, target).map_err(to_py)?;
    Ok((e.ladder, e.value, e.stderr))
}

/// The full verification report as JSON.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn verify_all(py: Python<'_>, config: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let c = config_from(config)?;
    let r = py.allow_threads(|| report::verify_all(&c)).map_err(to_py)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn magnetic_ncg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gap_label, m)?)?;
    m.add_function(wrap_pyfunction!(chern_number, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(invariant, m)?)?;
    m.add_function(wrap_pyfunction!(dixmier_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
