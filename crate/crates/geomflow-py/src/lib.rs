//! Python bindings: the main grid operations, invariants, flows and
//! verification suites, with plain lists at the boundary.

use geomflow_core::curves::{
    projective_to_star, reparametrize_arclength, Curve, EuclideanCurve, LagrangianCurve,
    ProjectiveCurve,
};
use geomflow_core::flows::{
    self, invariantization_oracle, run_flow, FlowOptions, FlowSpec, RunStatus,
};
use geomflow_core::hamiltonian::{self, CoefficientFields};
use geomflow_core::invariants;
use geomflow_core::numerics::{GridFunction, PeriodicGrid};
use geomflow_core::tolerances::Tolerances;
use geomflow_core::verify;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: geomflow_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field(values: Vec<f64>, period: f64) -> PyResult<GridFunction> {
    let grid = PeriodicGrid::new(values.len(), period).map_err(err)?;
    GridFunction::new(grid, values).map_err(err)
}

/// order-th spectral derivative of periodic samples.
#[pyfunction]
fn derivative(values: Vec<f64>, period: f64, order: u32) -> PyResult<Vec<f64>> {
    Ok(field(values, period)?
        .derivative(order)
        .map_err(err)?
        .values()
        .to_vec())
}

/// Periodic trapezoid quadrature.
#[pyfunction]
fn integrate(values: Vec<f64>, period: f64) -> PyResult<f64> {
    Ok(field(values, period)?.integrate())
}

/// Antiderivative with F(0) = base; returns (pointwise values, linear slope).
#[pyfunction]
fn antiderivative(values: Vec<f64>, period: f64, base: f64) -> PyResult<(Vec<f64>, f64)> {
    let a = field(values, period)?.antiderivative(base).map_err(err)?;
    Ok((a.values(), a.slope))
}

/// Schwarzian derivative of u(x) = slope x + periodic, sampled on [0, period).
#[pyfunction]
fn schwarzian(u_values: Vec<f64>, period: f64, slope: f64) -> PyResult<Vec<f64>> {
    let grid = PeriodicGrid::new(u_values.len(), period).map_err(err)?;
    let periodic: Vec<f64> = u_values
        .iter()
        .enumerate()
        .map(|(j, &u)| u - slope * grid.point(j))
        .collect();
    let u = ProjectiveCurve::new(slope, GridFunction::new(grid, periodic).map_err(err)?)
        .map_err(err)?;
    Ok(invariants::schwarzian(&u).map_err(err)?.s.values().to_vec())
}

/// Arc-length curvature and torsion of a closed space curve.
#[pyfunction]
fn curvature_torsion(
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    period: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let c = EuclideanCurve::new([
        field(x, period)?,
        field(y, period)?,
        field(z, period)?,
    ])
    .map_err(err)?;
    let inv = invariants::curvature_torsion(&c).map_err(err)?;
    Ok((inv.kappa.values().to_vec(), inv.tau.values().to_vec()))
}

/// Resample a closed space curve by arc length; returns (x, y, z, length).
#[pyfunction(name = "reparametrize_arclength")]
fn reparametrize_arclength_py(
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    period: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    let c = EuclideanCurve::new([
        field(x, period)?,
        field(y, period)?,
        field(z, period)?,
    ])
    .map_err(err)?;
    let r = reparametrize_arclength(&c).map_err(err)?;
    Ok((
        r.component(0).values().to_vec(),
        r.component(1).values().to_vec(),
        r.component(2).values().to_vec(),
        r.grid().length(),
    ))
}

/// Hasimoto function of (kappa, tau): returns (nu, eta, phase_slope).
#[pyfunction]
fn hasimoto(
    kappa: Vec<f64>,
    tau: Vec<f64>,
    period: f64,
    gauge_base: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let inv = invariants::EuclideanInvariants {
        kappa: field(kappa, period)?,
        tau: field(tau, period)?,
    };
    let nat = invariants::hasimoto(&inv, gauge_base).map_err(err)?;
    Ok((nat.nu, nat.eta, nat.phase_slope))
}

/// Centro-affine curvature of the star lift of u; returns (p, residual).
#[pyfunction]
fn centroaffine_of_lift(u_periodic: Vec<f64>, period: f64, slope: f64) -> PyResult<(Vec<f64>, f64)> {
    let u = ProjectiveCurve::new(slope, field(u_periodic, period)?).map_err(err)?;
    let star = projective_to_star(&u).map_err(err)?;
    let inv = invariants::centroaffine_curvature(&star).map_err(err)?;
    Ok((inv.p.values().to_vec(), inv.residual))
}

/// Apply a catalog Poisson operator to scalar input. `name` is one of
/// kdv-first | kdv-second | rp1-reduced | rp1-companion; k supplies the
/// coefficient field where one is needed.
#[pyfunction]
#[pyo3(signature = (name, input, period, k = None))]
fn poisson_apply(
    name: &str,
    input: Vec<f64>,
    period: f64,
    k: Option<Vec<f64>>,
) -> PyResult<Vec<f64>> {
    let mut fields = CoefficientFields::default();
    if let Some(k) = k {
        fields.k = Some(field(k, period)?);
    }
    let op = hamiltonian::poisson_catalog(name, &fields).map_err(err)?;
    Ok(op
        .apply_scalar(&field(input, period)?)
        .map_err(err)?
        .values()
        .to_vec())
}

/// Skew-adjointness residual of a catalog operator with the given fields.
#[pyfunction]
#[pyo3(signature = (name, period, n, seed, k = None, kappa = None, tau = None))]
fn adjoint_residual(
    name: &str,
    period: f64,
    n: usize,
    seed: u64,
    k: Option<Vec<f64>>,
    kappa: Option<Vec<f64>>,
    tau: Option<Vec<f64>>,
) -> PyResult<f64> {
    use rand::SeedableRng;
    let grid = PeriodicGrid::new(n, period).map_err(err)?;
    let mut fields = CoefficientFields::default();
    if let Some(v) = k {
        fields.k = Some(field(v, period)?);
    }
    if let Some(v) = kappa {
        fields.kappa = Some(field(v, period)?);
    }
    if let Some(v) = tau {
        fields.tau = Some(field(v, period)?);
    }
    let op = hamiltonian::poisson_catalog(name, &fields).map_err(err)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    hamiltonian::adjoint_residual(&op, 5, &grid, &mut rng).map_err(err)
}

fn simulate_spec(flow: &str, lambda: f64, exponent: u32) -> PyResult<FlowSpec> {
    FlowSpec::from_name(flow, lambda, exponent).map_err(err)
}

/// Integrate the Schwarzian KdV family from u = x + 0.1 sin x and return a
/// dict with times and the Schwarzian history.
#[pyfunction]
#[pyo3(signature = (flow, n, dt, steps, stride, lambda = 0.0, exponent = 2))]
fn simulate_projective(
    py: Python<'_>,
    flow: &str,
    n: usize,
    dt: f64,
    steps: usize,
    stride: usize,
    lambda: f64,
    exponent: u32,
) -> PyResult<Py<PyDict>> {
    let spec = simulate_spec(flow, lambda, exponent)?;
    let grid = PeriodicGrid::two_pi(n).map_err(err)?;
    let u = ProjectiveCurve::from_fn(grid, 1.0, |x| 0.1 * x.sin()).map_err(err)?;
    let run = run_flow(
        &spec,
        &Curve::Projective(u),
        dt,
        steps,
        stride,
        &FlowOptions::default(),
    )
    .map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("flow", run.flow.clone())?;
    out.set_item("times", run.times.clone())?;
    out.set_item(
        "completed",
        matches!(run.status, RunStatus::Completed),
    )?;
    if let Some(hist) = run.invariant_histories.get("schwarzian") {
        out.set_item("schwarzian", hist.clone())?;
    }
    Ok(out.into())
}

/// d(S)/dt at t = 0 measured by the invariantization oracle for the named
/// projective flow, plus the matching operator prediction (D^3+2kD+k')k.
#[pyfunction]
#[pyo3(signature = (n, stencil_dt, micro_dt))]
fn kdv_oracle_vs_operator(n: usize, stencil_dt: f64, micro_dt: f64) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let grid = PeriodicGrid::two_pi(n).map_err(err)?;
    let u = ProjectiveCurve::from_fn(grid, 1.0, |x| 0.1 * x.sin()).map_err(err)?;
    let s = invariants::schwarzian(&u).map_err(err)?.s;
    let expect = hamiltonian::kdv_second(&s)
        .map_err(err)?
        .apply_scalar(&s)
        .map_err(err)?;
    let oracle = invariantization_oracle(
        &FlowSpec::SchwarzianKdv,
        &Curve::Projective(u),
        &flows::schwarzian_of,
        stencil_dt,
        micro_dt,
        1e-3,
    )
    .map_err(err)?;
    let rel = oracle.rate[0]
        .sub(&expect)
        .map_err(err)?
        .norm_sup()
        / expect.norm_sup();
    Ok((rel, oracle.rate[0].values().to_vec(), expect.values().to_vec()))
}

/// Zero-curvature residual of the KdV pair on a matched lambda-realization
/// run (n, dt, steps, stride as in the CLI defaults).
#[pyfunction]
fn akns_kdv_residual(n: usize, lambda: f64, dt: f64, steps: usize, stride: usize) -> PyResult<f64> {
    let grid = PeriodicGrid::two_pi(n).map_err(err)?;
    let u = ProjectiveCurve::from_fn(grid, 1.0, |x| 0.1 * x.sin()).map_err(err)?;
    let spec = FlowSpec::SchwarzianKdvLambda { lambda, exponent: 2 };
    let run = run_flow(
        &spec,
        &Curve::Projective(u),
        dt,
        steps,
        stride,
        &FlowOptions::default(),
    )
    .map_err(err)?;
    let history: Vec<(f64, ProjectiveCurve)> = run
        .times
        .iter()
        .zip(&run.snapshots)
        .map(|(t, c)| match c {
            Curve::Projective(u) => (*t, u.clone()),
            _ => unreachable!(),
        })
        .collect();
    let pair = geomflow_core::akns::kdv_akns_pair(&history, lambda).map_err(err)?;
    Ok(geomflow_core::akns::zero_curvature_residual(&pair)
        .map_err(err)?
        .residual)
}

/// Eigenvalue fields of the Lagrangian Schwarzian for a diagonal curve made
/// of two scalar reparametrizations.
#[pyfunction]
fn lagrangian_schwarzian_diagonal(
    ua_periodic: Vec<f64>,
    ub_periodic: Vec<f64>,
    period: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let ua = ProjectiveCurve::new(1.0, field(ua_periodic, period)?).map_err(err)?;
    let ub = ProjectiveCurve::new(1.0, field(ub_periodic, period)?).map_err(err)?;
    let c = LagrangianCurve::diagonal(&[ua, ub]).map_err(err)?;
    let ls = invariants::lagrangian_schwarzian(&c).map_err(err)?;
    Ok(ls.s_d.iter().map(|f| f.values().to_vec()).collect())
}

/// Run one verification suite; returns {suite, pass, checks: [...]}.
#[pyfunction]
#[pyo3(signature = (name, seed = 2024))]
fn verify_suite(py: Python<'_>, name: &str, seed: u64) -> PyResult<Py<PyDict>> {
    let report = verify::run_suite(name, seed, &Tolerances::default()).map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("suite", report.suite.clone())?;
    out.set_item("pass", report.pass)?;
    let checks: Vec<Py<PyDict>> = report
        .checks
        .iter()
        .map(|c| {
            let d = PyDict::new_bound(py);
            d.set_item("name", c.name.clone()).unwrap();
            d.set_item("residual", c.residual).unwrap();
            d.set_item("tolerance", c.tolerance).unwrap();
            d.set_item("pass", c.pass).unwrap();
            d.into()
        })
        .collect();
    out.set_item("checks", checks)?;
    Ok(out.into())
}

#[pyfunction]
fn suite_names() -> Vec<String> {
    verify::SUITES.iter().map(|s| s.to_string()).collect()
}

#[pymodule]
fn geomflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(derivative, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(antiderivative, m)?)?;
    m.add_function(wrap_pyfunction!(schwarzian, m)?)?;
    m.add_function(wrap_pyfunction!(curvature_torsion, m)?)?;
    m.add_function(wrap_pyfunction!(reparametrize_arclength_py, m)?)?;
    m.add_function(wrap_pyfunction!(hasimoto, m)?)?;
    m.add_function(wrap_pyfunction!(centroaffine_of_lift, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_apply, m)?)?;
    m.add_function(wrap_pyfunction!(adjoint_residual, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_projective, m)?)?;
    m.add_function(wrap_pyfunction!(kdv_oracle_vs_operator, m)?)?;
    m.add_function(wrap_pyfunction!(akns_kdv_residual, m)?)?;
    m.add_function(wrap_pyfunction!(lagrangian_schwarzian_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    Ok(())
}
