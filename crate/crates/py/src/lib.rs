//! Python bindings: closed-loop solves, the Crank-Nicolson oracle and half-line norms.
//! Samples are passed as lists of complex numbers on the uniform grid of `[0, L]`.

use ::halfline_nls as core_nls;
use core_nls::fd_oracle::crank_nicolson_run;
use core_nls::nls::{continue_solution, field_rows, ContinuationStatus, NlsProblem};
use core_nls::sobolev::{sobolev_norm_half_line as half_line_norm, Grid1D, GridFunction, SobolevIndex, C64};
use core_nls::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(m) => PyValueError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn samples(u0: Vec<C64>, length: f64) -> PyResult<GridFunction> {
    let grid = Grid1D::half_line(length, u0.len()).map_err(to_py)?;
    GridFunction::new(grid, u0).map_err(to_py)
}

/// Closed-loop solve of `i u_t + u_xx + k|u|^p u = 0`, `u_x(0) = -lam |u|^r u` on `[0, T]`.
#[pyfunction]
#[pyo3(signature = (u0, *, s, p, r, k, lam, horizon, length, dt, t0=None))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    u0: Vec<C64>,
    s: f64,
    p: f64,
    r: f64,
    k: f64,
    lam: f64,
    horizon: f64,
    length: f64,
    dt: f64,
    t0: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut pb = NlsProblem::closed_loop(s, p, r, k, lam, horizon, samples(u0, length)?).map_err(to_py)?;
    pb.options.dt = dt;
    pb.options.t0_initial = t0;
    let run = continue_solution(&pb).map_err(to_py)?;
    let mut rows = Vec::new();
    for (i, field) in run.fields.iter().enumerate() {
        rows.extend(field_rows(&pb, field).into_iter().skip(usize::from(i > 0)));
    }
    let status = match run.status {
        ContinuationStatus::Completed => "completed",
        ContinuationStatus::BlowupDetected => "blowup_detected",
        ContinuationStatus::Stalled => "stalled",
    };
    let out = PyDict::new(py);
    out.set_item("status", status)?;
    out.set_item("t_reached", run.t_reached)?;
    out.set_item("t", rows.iter().map(|r| r.0).collect::<Vec<_>>())?;
    out.set_item("hs_norm", rows.iter().map(|r| r.1).collect::<Vec<_>>())?;
    out.set_item("mass", rows.iter().map(|r| r.2).collect::<Vec<_>>())?;
    out.set_item("boundary_residual", rows.iter().map(|r| r.3).collect::<Vec<_>>())?;
    out.set_item("x", pb.u0.grid().points())?;
    let last = run.fields.last().map(|f| f.slab.slice(f.slab.steps()).values().to_vec());
    out.set_item("u_final", last)?;
    Ok(out)
}

/// Crank-Nicolson reference run on the same grid.
#[pyfunction]
#[pyo3(signature = (u0, *, p, r, k, lam, horizon, length, dt))]
#[allow(clippy::too_many_arguments)]
fn crank_nicolson<'py>(
    py: Python<'py>,
    u0: Vec<C64>,
    p: f64,
    r: f64,
    k: f64,
    lam: f64,
    horizon: f64,
    length: f64,
    dt: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let pb = NlsProblem::closed_loop(1.0, p, r, k, lam, horizon, samples(u0, length)?).map_err(to_py)?;
    let run = crank_nicolson_run(&pb, pb.u0.grid().dx(), dt).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("t", run.slab.times().to_vec())?;
    out.set_item("mass", run.mass)?;
    out.set_item("u_final", run.slab.slice(run.slab.steps()).values().to_vec())?;
    out.set_item("truncation_warning", run.truncation_warning)?;
    Ok(out)
}

/// `‖u‖_{H^s(ℝ₊)}` of samples on `[0, L]`.
#[pyfunction]
fn sobolev_norm_half_line(values: Vec<C64>, length: f64, s: f64) -> PyResult<f64> {
    let s = SobolevIndex::new(s).map_err(to_py)?;
    half_line_norm(&samples(values, length)?, s).map_err(to_py)
}

#[pymodule]
fn halfline_nls(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(crank_nicolson, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_norm_half_line, m)?)?;
    Ok(())
}
