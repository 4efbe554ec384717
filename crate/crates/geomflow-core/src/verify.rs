//! Verification suites: each one exercises a family of identities at the
//! pinned tolerances and reports per-check residuals. The CLI `verify`
//! subcommand and the acceptance test target both run these.

use crate::akns::{
    euclidean_akns_pair, gauge_transform_constant, kdv_akns_pair, zero_curvature_residual,
};
use crate::curves::{
    projective_to_star, reparametrize_arclength, star_to_projective, Curve, EuclideanCurve,
    LagrangianCurve, ProjectiveCurve,
};
use crate::error::{Error, Result};
use crate::flows::{
    invariantization_oracle, kappa_tau_of, p_of, run_flow, s_d_of, schwarzian_of, FlowOptions,
    FlowSpec, InvariantCoefficient, RunStatus, SchwarzianCoefficient,
};
use crate::frames::{euclidean_serret_frenet, psl2_frame, psl2_serret_frenet};
use crate::hamiltonian::{
    adjoint_residual, conformal_cc, euclid_a, euclid_b, euclid_c, euclid_r, kdv_first, kdv_second,
    lagrangian_diag, rp1_companion, rp1_reduced, variational_derivative, DiffOperator, EuclidP,
    Functional,
};
use crate::invariants::{
    centroaffine_curvature, curvature_torsion, hasimoto, moebius_jet, schwarzian,
    window_schwarzian, EuclideanInvariants,
};
use crate::numerics::{GridFunction, PeriodicGrid};
use crate::tolerances::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;

pub const SUITES: &[&str] = &[
    "kdv-invariantization",
    "general-h",
    "sawada-kotera",
    "hasimoto-nls",
    "euclid-P",
    "akns-kdv",
    "lagrangian-decoupled",
    "conformal-cc",
    "pinkall",
    "frames",
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        SuiteReport { suite: suite.to_string(), seed, checks: Vec::new(), pass: true }
    }

    fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        let pass = residual < tolerance && residual.is_finite();
        self.pass &= pass;
        self.checks.push(CheckResult { name: name.into(), residual, tolerance, pass });
    }
}

/// Standard projective test datum u = x + 0.1 sin x.
pub fn base_u(n: usize) -> Result<ProjectiveCurve> {
    ProjectiveCurve::from_fn(PeriodicGrid::two_pi(n)?, 1.0, |x| 0.1 * x.sin())
}

/// Standard closed space curve: perturbed circle with genuine torsion,
/// arc-length parametrized.
pub fn wavy_loop(n: usize) -> Result<EuclideanCurve> {
    let grid = PeriodicGrid::two_pi(n)?;
    let c = EuclideanCurve::from_fn(grid, |t| {
        [
            (1.0 + 0.1 * (2.0 * t).cos()) * t.cos(),
            (1.0 + 0.1 * (2.0 * t).cos()) * t.sin(),
            0.1 * (2.0 * t).sin(),
        ]
    })?;
    reparametrize_arclength(&c)
}

fn rel_sup(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    Ok(a.sub(b)?.norm_sup() / b.norm_sup().max(1e-300))
}

pub fn run_suite(name: &str, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    match name {
        "kdv-invariantization" => suite_kdv_invariantization(seed, tol),
        "general-h" => suite_general_h(seed, tol),
        "sawada-kotera" => suite_sawada_kotera(seed, tol),
        "hasimoto-nls" => suite_hasimoto_nls(seed, tol),
        "euclid-P" => suite_euclid_p(seed, tol),
        "akns-kdv" => suite_akns_kdv(seed, tol),
        "lagrangian-decoupled" => suite_lagrangian(seed, tol),
        "conformal-cc" => suite_conformal(seed, tol),
        "pinkall" => suite_pinkall(seed, tol),
        "frames" => suite_frames(seed, tol),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// Residual report for a recorded projective history: the zero-curvature
/// residual of the KdV pair plus an order estimate obtained by subsampling
/// every other snapshot (doubled stencil spacing), when enough are stored.
#[derive(Debug, Clone, Serialize)]
pub struct AknsRunReport {
    pub lambda: f64,
    pub residual: f64,
    pub stencil_order_estimate: Option<f64>,
}

pub fn akns_report_from_history(
    history: &[(f64, ProjectiveCurve)],
    lambda: f64,
) -> Result<AknsRunReport> {
    let pair = kdv_akns_pair(history, lambda)?;
    let residual = zero_curvature_residual(&pair)?.residual;
    let stencil_order_estimate = if history.len() >= 9 {
        let coarse: Vec<(f64, ProjectiveCurve)> =
            history.iter().step_by(2).cloned().collect();
        let coarse_res =
            zero_curvature_residual(&kdv_akns_pair(&coarse, lambda)?)?.residual;
        Some((coarse_res / residual).log2())
    } else {
        None
    };
    Ok(AknsRunReport { lambda, residual, stencil_order_estimate })
}

/// Skewness of every catalog operator with random smooth coefficients.
pub fn operator_skewness_checks(seed: u64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e11);
    let grid = PeriodicGrid::two_pi(64)?;
    let mut rand_field = |offset: f64, amp: f64| -> Result<GridFunction> {
        let (a, b, c) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        GridFunction::from_fn(grid.clone(), move |x| {
            offset + amp * (a * x.sin() + b * (2.0 * x).cos() + c * (3.0 * x).sin())
        })
    };
    let k = rand_field(0.0, 0.4)?;
    let kappa = rand_field(1.2, 0.3)?;
    let tau = rand_field(0.2, 0.3)?;
    let k1 = rand_field(0.0, 0.4)?;
    let k2 = rand_field(0.0, 0.4)?;
    let s0 = rand_field(0.0, 0.4)?;
    let s1 = rand_field(0.0, 0.4)?;
    let ops: Vec<DiffOperator> = vec![
        kdv_first(),
        kdv_second(&k)?,
        rp1_reduced(&k),
        rp1_companion(),
        euclid_r(&kappa, &tau)?,
        euclid_a(&kappa)?,
        euclid_b()?,
        euclid_c(&kappa)?,
        conformal_cc(&k1, &k2)?,
        lagrangian_diag(&[s0, s1])?,
    ];
    let mut out = Vec::new();
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 0xad01);
    for op in &ops {
        let r = adjoint_residual(op, 5, &grid, &mut rng2)?;
        out.push(CheckResult {
            name: format!("skew[{}]", op.name),
            residual: r,
            tolerance: tol.operator_skewness,
            pass: r < tol.operator_skewness,
        });
    }
    Ok(out)
}

fn suite_kdv_invariantization(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("kdv-invariantization", seed);

    // oracle dS/dt vs (D^3 + 2kD + k') k = k''' + 3kk' at n = 256, run
    // dt = 1e-5 with micro steps dt/100; the stencil differences snapshots
    // eight run-steps apart, above the roundoff floor of the spectral S
    let u = base_u(256)?;
    let s = schwarzian(&u)?.s;
    let expect = kdv_second(&s)?.apply_scalar(&s)?;
    let oracle = invariantization_oracle(
        &FlowSpec::SchwarzianKdv,
        &Curve::Projective(u.clone()),
        &schwarzian_of,
        8e-5,
        1e-7,
        tol.kdv_invariantization,
    )?;
    report.push(
        "oracle dS/dt vs k'''+3kk'",
        rel_sup(&oracle.rate[0], &expect)?,
        tol.kdv_invariantization,
    );

    // dictionary k = -S/2: same oracle against the reduced RP^1 structure.
    // The k' term makes the flow fourth order and exponentially ill-posed at
    // high wavenumber; n = 64 keeps the roundoff growth over the stencil
    // window negligible.
    let u_d = base_u(64)?;
    let s_d = schwarzian(&u_d)?.s;
    let h = SchwarzianCoefficient::jet_poly([0.4, 0.15, 0.0, 0.2]);
    let h_field = h.eval(&s_d)?;
    let k_half = s_d.scale(-0.5);
    let reduced = rp1_reduced(&k_half).apply_scalar(&h_field)?;
    let oracle_h = invariantization_oracle(
        &FlowSpec::ProjectiveRealization { h },
        &Curve::Projective(u_d),
        &schwarzian_of,
        1e-5,
        1e-7,
        tol.rp1_dictionary,
    )?;
    // d(-S/2)/dt vs (-D^3/2 + kD + Dk) h
    let rate_k = oracle_h.rate[0].scale(-0.5);
    report.push(
        "rp1-reduced with k = -S/2 vs oracle",
        rel_sup(&rate_k, &reduced)?,
        tol.rp1_dictionary,
    );

    // recursion instance: kdv-second . delta(k^2/2) = kdv-first . delta(k^3/2 - k'^2/2)
    let grid = PeriodicGrid::two_pi(64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let (a, b) = (rng.gen_range(0.2..0.5), rng.gen_range(-0.3..0.3));
    let k = GridFunction::from_fn(grid, move |x| a * x.sin() + b * (2.0 * x).cos())?;
    let via_second = kdv_second(&k)?.apply_scalar(&k)?;
    let h1 = Functional::new("pencil", 1, |jet| 0.5 * jet[0].powi(3) - 0.5 * jet[1] * jet[1])?;
    let via_first = kdv_first().apply_scalar(&variational_derivative(&h1, &k)?)?;
    report.push(
        "bi-Hamiltonian pencil instance",
        via_second.sub(&via_first)?.norm_sup(),
        1e-8,
    );

    // skewness of the scalar structures
    for check in operator_skewness_checks(seed, tol)? {
        if ["skew[kdv-first]", "skew[kdv-second]", "skew[rp1-reduced]", "skew[rp1-companion]"]
            .contains(&check.name.as_str())
        {
            report.pass &= check.pass;
            report.checks.push(check);
        }
    }
    Ok(report)
}

fn suite_general_h(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("general-h", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
    let u = base_u(64)?;
    let s = schwarzian(&u)?.s;
    for trial in 0..3 {
        // the k' slot drives an even-order (ill-posed) linearization; keep
        // its coefficient small enough that roundoff growth stays far below
        // the tolerance over the stencil window
        let coeffs = [
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.35..0.35),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        ];
        let h = SchwarzianCoefficient::jet_poly(coeffs);
        let h_field = h.eval(&s)?;
        let expect = kdv_second(&s)?.apply_scalar(&h_field)?;
        let oracle = invariantization_oracle(
            &FlowSpec::ProjectiveRealization { h },
            &Curve::Projective(u.clone()),
            &schwarzian_of,
            1e-5,
            1e-8,
            tol.general_h,
        )?;
        report.push(
            format!("general h trial {trial} vs (D^3+2kD+k')h"),
            rel_sup(&oracle.rate[0], &expect)?,
            tol.general_h,
        );
    }
    Ok(report)
}

fn suite_sawada_kotera(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("sawada-kotera", seed);
    // fifth-order flow: n = 48 keeps RK4 stable at the pinned dt = 1e-7
    let u = base_u(48)?;
    let s = schwarzian(&u)?.s;
    let grad = s.derivative(2)?.scale(2.0).add(&s.mul(&s)?.scale(0.5))?;
    let expect = kdv_second(&s)?.apply_scalar(&grad)?;
    let oracle = invariantization_oracle(
        &FlowSpec::SawadaKoteraRealization,
        &Curve::Projective(u),
        &schwarzian_of,
        1e-5,
        1e-7,
        tol.sawada_kotera,
    )?;
    report.push(
        "oracle dS/dt vs 2k^(5)+5kk'''+5k'k''+5/2 k'k^2",
        rel_sup(&oracle.rate[0], &expect)?,
        tol.sawada_kotera,
    );
    Ok(report)
}

fn suite_hasimoto_nls(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("hasimoto-nls", seed);
    let c = wavy_loop(256)?;
    let dt = 1e-4;
    let stride = 25;
    let run = run_flow(
        &FlowSpec::VortexFilament,
        &Curve::Euclidean(c),
        dt,
        100,
        stride,
        &FlowOptions { dealias: false, reparametrize: false },
    )?;
    if !matches!(run.status, RunStatus::Completed) {
        return Err(Error::Inconsistency(format!("VF run aborted: {:?}", run.status)));
    }
    // Hasimoto data at the five snapshots
    let mut psis: Vec<Vec<Complex64>> = Vec::new();
    let mut mus: Vec<f64> = Vec::new();
    let mut kappas: Vec<GridFunction> = Vec::new();
    let grid = run.snapshots[0].grid().clone();
    for snap in &run.snapshots {
        let cc = match snap {
            Curve::Euclidean(c) => c,
            _ => unreachable!(),
        };
        let inv = curvature_torsion(cc)?;
        let nat = hasimoto(&inv, 0.0)?;
        psis.push(nat.psi.values().to_vec());
        mus.push(nat.phase_slope);
        kappas.push(inv.kappa);
    }
    if psis.len() != 5 {
        return Err(Error::InsufficientSnapshots { needed: 5, got: psis.len() });
    }
    let mid = 2;
    let mu = mus[mid];
    let n = grid.len();
    // re-slope all snapshots to the center mu
    for (i, psi) in psis.iter_mut().enumerate() {
        let dmu = mus[i] - mu;
        for (j, v) in psi.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, dmu * grid.point(j));
        }
    }
    let h_t = dt * stride as f64;
    let psi_t: Vec<Complex64> = (0..n)
        .map(|j| {
            (psis[0][j] - psis[4][j] + (psis[3][j] - psis[1][j]) * 8.0)
                / (12.0 * h_t)
        })
        .collect();
    let psi_c = crate::numerics::ComplexGridFunction::new(grid.clone(), psis[mid].clone())?;
    let psi_x = psi_c.derivative(1)?;
    let psi_xx = psi_c.derivative(2)?;
    // r = i Psi_t + (Psi'' + 2 i mu Psi' - mu^2 Psi) + |Psi|^2 Psi / 2
    let i_unit = Complex64::new(0.0, 1.0);
    let r: Vec<Complex64> = (0..n)
        .map(|j| {
            let psi = psi_c.values()[j];
            i_unit * psi_t[j]
                + psi_xx.values()[j]
                + 2.0 * i_unit * mu * psi_x.values()[j]
                - mu * mu * psi
                + 0.5 * psi.norm_sqr() * psi
        })
        .collect();
    // least-squares real gauge constant c(t): minimize ||r - c Psi||
    let num: f64 = (0..n).map(|j| (psi_c.values()[j].conj() * r[j]).re).sum();
    let den: f64 = (0..n).map(|j| psi_c.values()[j].norm_sqr()).sum();
    let c_fit = num / den;
    let resid_norm: f64 = (0..n)
        .map(|j| (r[j] - c_fit * psi_c.values()[j]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let rate_norm: f64 = psi_t.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    report.push(
        "NLS residual after real gauge fit",
        resid_norm / rate_norm,
        tol.hasimoto_nls,
    );
    // |Phi| = kappa pointwise on the center snapshot
    let mod_resid = (0..n)
        .map(|j| (psi_c.values()[j].norm() - kappas[mid].values()[j]).abs())
        .fold(0.0_f64, f64::max);
    report.push("|Phi| = kappa", mod_resid, 1e-10);
    let _ = seed;
    Ok(report)
}

fn euclid_oracle_pair(
    c: &EuclideanCurve,
    h: InvariantCoefficient,
    g: InvariantCoefficient,
    stencil_dt: f64,
    micro_dt: f64,
    tol: f64,
) -> Result<(Vec<GridFunction>, (GridFunction, GridFunction))> {
    let inv = curvature_torsion(c)?;
    let p = EuclidP::new(inv.kappa.clone(), inv.tau.clone())?;
    let applied = p.apply(&g.eval(&inv)?, &h.eval(&inv)?)?;
    let oracle = invariantization_oracle(
        &FlowSpec::EuclideanHG { h, g },
        &Curve::Euclidean(c.clone()),
        &kappa_tau_of,
        stencil_dt,
        micro_dt,
        tol,
    )?;
    Ok((oracle.rate, applied))
}

/// Asymmetric perturbed loop: generic enough that the solvability
/// correction directions do not vanish by symmetry.
fn skew_loop(n: usize) -> Result<EuclideanCurve> {
    let grid = PeriodicGrid::two_pi(n)?;
    let c = EuclideanCurve::from_fn(grid, |t| {
        let r = 1.0 + 0.06 * (2.0 * t).cos() + 0.015 * (3.0 * t + 0.4).sin();
        [r * t.cos(), r * t.sin(), 0.06 * (2.0 * t).sin() + 0.015 * (3.0 * t).cos()]
    })?;
    reparametrize_arclength(&c)
}

fn suite_euclid_p(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("euclid-P", seed);
    let c = skew_loop(256)?;

    // vortex filament: (g, h) = (kappa, 0); the flow is dispersive
    // (Schroedinger-like) so a wide, accurate stencil window is fine
    let (oracle, applied) = euclid_oracle_pair(
        &c,
        InvariantCoefficient::zero(),
        InvariantCoefficient::kappa(),
        5e-4,
        1e-5,
        tol.euclid_p,
    )?;
    report.push("P(kappa,0) vs VF oracle [kappa_t]", rel_sup(&applied.0, &oracle[0])?, tol.euclid_p);
    report.push("P(kappa,0) vs VF oracle [tau_t]", rel_sup(&applied.1, &oracle[1])?, tol.euclid_p);

    // two random solvable (g, h) pairs built from kappa and tau. A tau
    // dependence inside h makes the flow's leading term fourth order and
    // exponentially ill-posed at high wavenumber, so these pairs run on the
    // n = 128 grid with a short stencil window that caps the e-fold growth
    // of roundoff modes.
    let c = skew_loop(128)?;
    let inv = curvature_torsion(&c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
    for trial in 0..2 {
        let (a0, a1) = (rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        let (b0, b1) = (rng.gen_range(-0.4..0.4), rng.gen_range(-0.2..0.2));
        let h = InvariantCoefficient::new(format!("h{trial}"), move |inv: &EuclideanInvariants| {
            inv.kappa.scale(b0).add(&inv.tau.scale(b1))
        });
        // correct g by a multiple of tau so mean(kappa g' + tau h') = 0
        let g_raw = move |inv: &EuclideanInvariants| -> Result<GridFunction> {
            inv.kappa
                .mul(&inv.tau)?
                .scale(a0)
                .add(&inv.kappa.derivative(1)?.scale(a1))
        };
        let h_now = h.eval(&inv)?;
        let mean_with = |g_field: &GridFunction| -> Result<f64> {
            Ok(inv
                .kappa
                .mul(&g_field.derivative(1)?)?
                .add(&inv.tau.mul(&h_now.derivative(1)?)?)?
                .mean())
        };
        let m_raw = mean_with(&g_raw(&inv)?)?;
        // pick a correction direction with nonzero mean(kappa d'): adding
        // beta * d to g shifts the mean by beta * mean(kappa d')
        let directions: Vec<(&str, GridFunction)> = vec![
            ("tau", inv.tau.clone()),
            ("kappa*tau", inv.kappa.mul(&inv.tau)?),
            ("tau^2", inv.tau.mul(&inv.tau)?),
        ];
        let mut chosen: Option<(usize, f64)> = None;
        for (i, (_, d)) in directions.iter().enumerate() {
            let m_d = inv.kappa.mul(&d.derivative(1)?)?.mean();
            if m_d.abs() > 1e-8 {
                chosen = Some((i, m_d));
                break;
            }
        }
        let (dir_idx, m_dir) = chosen.ok_or_else(|| {
            Error::Inconsistency("all solvability correction directions degenerate".into())
        })?;
        let beta = -m_raw / m_dir;
        let g = InvariantCoefficient::new(format!("g{trial}"), move |inv: &EuclideanInvariants| {
            let d = match dir_idx {
                0 => inv.tau.clone(),
                1 => inv.kappa.mul(&inv.tau)?,
                _ => inv.tau.mul(&inv.tau)?,
            };
            g_raw(inv)?.add(&d.scale(beta))
        });
        let (oracle, applied) = euclid_oracle_pair(&c, h, g, 1e-6, 1e-7, tol.euclid_p)?;
        report.push(
            format!("random pair {trial} [kappa_t]"),
            rel_sup(&applied.0, &oracle[0])?,
            tol.euclid_p,
        );
        report.push(
            format!("random pair {trial} [tau_t]"),
            rel_sup(&applied.1, &oracle[1])?,
            tol.euclid_p,
        );
    }

    for check in operator_skewness_checks(seed, tol)? {
        if check.name.starts_with("skew[euclid") {
            report.pass &= check.pass;
            report.checks.push(check);
        }
    }
    Ok(report)
}

fn projective_run_history(
    lambda: f64,
    n: usize,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Vec<(f64, ProjectiveCurve)>> {
    let u = base_u(n)?;
    let spec = FlowSpec::SchwarzianKdvLambda { lambda, exponent: 2 };
    let run = run_flow(&spec, &Curve::Projective(u), dt, steps, stride, &FlowOptions::default())?;
    if !matches!(run.status, RunStatus::Completed) {
        return Err(Error::Inconsistency(format!("lambda run aborted: {:?}", run.status)));
    }
    Ok(run
        .times
        .iter()
        .zip(&run.snapshots)
        .map(|(t, c)| match c {
            Curve::Projective(u) => (*t, u.clone()),
            _ => unreachable!(),
        })
        .collect())
}

fn suite_akns_kdv(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("akns-kdv", seed);
    for lambda in [0.0, 0.3, 0.7] {
        let hist = projective_run_history(lambda, 32, 1e-4, 800, 100)?;
        let pair = kdv_akns_pair(&hist, lambda)?;
        let rep = zero_curvature_residual(&pair)?;
        report.push(
            format!("zero-curvature residual (lambda = {lambda})"),
            rep.residual,
            tol.akns_residual,
        );
        report.push(
            format!("A trace-free (lambda = {lambda})"),
            pair.max_trace_a(),
            1e-12,
        );
        if (lambda - 0.7).abs() < 1e-12 {
            // negative control: corrupted B must be loudly incompatible
            let bad = zero_curvature_residual(&pair.corrupted_b())?;
            report.push(
                "negative control (corrupted B)",
                tol.akns_negative_control / bad.residual.max(1e-300),
                1.0,
            );
        }
    }
    // order-4 convergence in snapshot spacing
    let lambda = 0.5;
    let hist_h = projective_run_history(lambda, 32, 1e-4, 1600, 200)?;
    let hist_h2 = projective_run_history(lambda, 32, 1e-4, 1600, 100)?;
    let r_h = zero_curvature_residual(&kdv_akns_pair(&hist_h, lambda)?)?.residual;
    let r_h2 = zero_curvature_residual(&kdv_akns_pair(&hist_h2, lambda)?)?.residual;
    let order = (r_h / r_h2).log2();
    report.push("stencil order estimate |order - 4|", (order - 4.0).abs(), 0.8);

    // the Euclidean/NLS-side pair: A printed, B measured from the frame run
    let c = wavy_loop(256)?;
    let run = run_flow(
        &FlowSpec::VortexFilament,
        &Curve::Euclidean(c),
        8e-5,
        120,
        10,
        &FlowOptions { dealias: false, reparametrize: false },
    )?;
    let history: Vec<(f64, EuclideanCurve)> = run
        .times
        .iter()
        .zip(&run.snapshots)
        .map(|(t, c)| match c {
            Curve::Euclidean(c) => (*t, c.clone()),
            _ => unreachable!(),
        })
        .collect();
    let pair = euclidean_akns_pair(&history, 0.0)?;
    let rep = zero_curvature_residual(&pair)?;
    report.push("euclidean pair residual (lambda = 0, measured B)", rep.residual, 1e-4);
    Ok(report)
}

fn suite_lagrangian(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lagrangian-decoupled", seed);
    let grid = PeriodicGrid::two_pi(64)?;
    let ua = ProjectiveCurve::from_fn(grid.clone(), 1.0, |x| 0.1 * x.sin())?;
    let ub = ProjectiveCurve::from_fn(grid, 1.0, |x| 0.08 * x.cos())?;
    let c = LagrangianCurve::diagonal(&[ua, ub])?;

    let run = run_flow(
        &FlowSpec::LagrangianSkdv,
        &Curve::Lagrangian(c.clone()),
        1e-5,
        200,
        50,
        &FlowOptions::default(),
    )?;
    if !matches!(run.status, RunStatus::Completed) {
        return Err(Error::Inconsistency(format!("run aborted: {:?}", run.status)));
    }
    let offdiag = run
        .invariant_histories
        .get("offdiag_sup")
        .map(|rows| rows.iter().map(|r| r[0]).fold(0.0_f64, f64::max))
        .unwrap_or(f64::INFINITY);
    report.push("off-diagonal sup over run", offdiag, tol.lagrangian_offdiag);

    // each eigenvalue field satisfies scalar KdV
    let oracle = invariantization_oracle(
        &FlowSpec::LagrangianSkdv,
        &Curve::Lagrangian(c.clone()),
        &s_d_of,
        1e-5,
        1e-7,
        tol.lagrangian_kdv,
    )?;
    let ls = crate::invariants::lagrangian_schwarzian(&c)?;
    for (i, branch) in ls.s_d.iter().enumerate() {
        let expect = branch.derivative(3)?.add(
            &branch.mul(&branch.derivative(1)?)?.scale(3.0),
        )?;
        report.push(
            format!("s_d[{i}] satisfies KdV"),
            rel_sup(&oracle.rate[i], &expect)?,
            tol.lagrangian_kdv,
        );
    }

    for check in operator_skewness_checks(seed, tol)? {
        if check.name == "skew[lagrangian-diag]" {
            report.pass &= check.pass;
            report.checks.push(check);
        }
    }
    Ok(report)
}

fn suite_conformal(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("conformal-cc", seed);
    let grid = PeriodicGrid::two_pi(64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
    let (a, b) = (rng.gen_range(0.2..0.4), rng.gen_range(0.1..0.3));
    let k1 = GridFunction::from_fn(grid.clone(), move |x| a * x.sin() + 0.1 * (2.0 * x).cos())?;
    let k2 = GridFunction::from_fn(grid.clone(), move |x| b * (3.0 * x).sin())?;

    // k2 = 0 reduction: chain-level equality with rp1-reduced
    let zero = GridFunction::zeros(grid.clone());
    let cc0 = conformal_cc(&k1, &zero)?;
    let rp = rp1_reduced(&k1);
    let equal = cc0.dump()["blocks"][0][0] == rp.dump()["blocks"][0][0];
    report.push(
        "k2 = 0 block equals rp1-reduced (chain equality)",
        if equal { 0.0 } else { 1.0 },
        0.5,
    );
    let f = GridFunction::from_fn(grid, |x| 0.3 * x.sin() + 0.2 * (2.0 * x).cos())?;
    let via_cc = cc0.apply(&[f.clone(), zero.clone()])?;
    let via_rp = rp.apply_scalar(&f)?;
    report.push(
        "k2 = 0 action identical",
        via_cc[0].sub(&via_rp)?.norm_sup(),
        1e-15,
    );

    // h = (k1, k2) flow vs the hand-expanded system
    let op = conformal_cc(&k1, &k2)?;
    let out = op.apply(&[k1.clone(), k2.clone()])?;
    let k1x = k1.derivative(1)?;
    let k2x = k2.derivative(1)?;
    let e1 = k1
        .derivative(3)?
        .scale(-0.5)
        .add(&k1.mul(&k1x)?.scale(3.0))?
        .add(&k2.mul(&k2x)?.scale(3.0))?;
    let e2 = k2
        .derivative(3)?
        .scale(0.5)
        .add(&k1x.mul(&k2)?)?
        .sub(&k1.mul(&k2x)?)?;
    report.push("flow matches chain expansion [k1]", out[0].sub(&e1)?.norm_sup(), tol.conformal_flow);
    report.push("flow matches chain expansion [k2]", out[1].sub(&e2)?.norm_sup(), tol.conformal_flow);

    for check in operator_skewness_checks(seed, tol)? {
        if check.name == "skew[conformal-cc]" {
            report.pass &= check.pass;
            report.checks.push(check);
        }
    }
    Ok(report)
}

fn suite_pinkall(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("pinkall", seed);
    let u0 = base_u(128)?;
    let star0 = projective_to_star(&u0)?;

    // dictionary at t = 0: p = -S/2, established numerically
    let p0 = centroaffine_curvature(&star0)?;
    let s0 = schwarzian(&u0)?.s;
    report.push(
        "dictionary p = -S/2 at t = 0",
        p0.p.sub(&s0.scale(-0.5))?.norm_sup(),
        tol.pinkall_dictionary,
    );
    report.push("gamma'' = p gamma residual", p0.residual, 1e-6);

    let run = run_flow(
        &FlowSpec::PinkallStar,
        &Curve::Star(star0.clone()),
        1e-5,
        400,
        100,
        &FlowOptions::default(),
    )?;
    if !matches!(run.status, RunStatus::Completed) {
        return Err(Error::Inconsistency(format!("run aborted: {:?}", run.status)));
    }
    let det_drift = run
        .invariant_histories
        .get("det_gamma_gamma1")
        .map(|rows| {
            rows.iter()
                .flat_map(|r| r.iter().map(|v| (v - 1.0).abs()))
                .fold(0.0_f64, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    report.push("det(gamma, gamma') preserved along flow", det_drift, tol.pinkall_det);

    // dictionary at the final snapshot, with u recovered from gamma
    let last = match run.snapshots.last().unwrap() {
        Curve::Star(c) => c.clone(),
        _ => unreachable!(),
    };
    let u_back = star_to_projective(&last, u0.slope())?;
    let s_back = schwarzian(&u_back)?.s;
    let p_back = centroaffine_curvature(&last)?;
    report.push(
        "dictionary p = -S/2 after the flow",
        p_back.p.sub(&s_back.scale(-0.5))?.norm_sup(),
        tol.pinkall_dictionary,
    );

    // p evolves by the KdV the dictionary predicts: dp/dt = p''' - 6 p p'
    let oracle = invariantization_oracle(
        &FlowSpec::PinkallStar,
        &Curve::Star(star0),
        &p_of,
        1e-5,
        1e-7,
        1e-4,
    )?;
    let expect = p0
        .p
        .derivative(3)?
        .sub(&p0.p.mul(&p0.p.derivative(1)?)?.scale(6.0))?;
    report.push(
        "dp/dt matches p''' - 6pp'",
        rel_sup(&oracle.rate[0], &expect)?,
        1e-4,
    );
    let _ = seed;
    Ok(report)
}

fn suite_frames(seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("frames", seed);
    let u = base_u(128)?;
    let lambda = 0.7;
    let frame = psl2_frame(&u, lambda)?;
    let norm = frame.normalization_residual(&u)?;
    report.push("normalization rho.u = 0", norm[0], tol.frame_normalization);
    report.push("normalization rho.u1 = 1", norm[1], tol.frame_normalization);
    report.push("normalization rho.u2 = 2 lambda", norm[2], tol.frame_normalization);
    report.push("det rho = 1", frame.det_residual(), 1e-12);
    let sf = psl2_serret_frenet(&frame, &u)?;
    report.push("||rho_x - K rho||", sf.verification_residual, tol.frame_consistency);

    // constant gauge removes lambda from the diagonal exactly
    let g = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, lambda, 1.0]);
    let conj = gauge_transform_constant(&sf.k, &g)?;
    let diag_max = conj
        .values()
        .iter()
        .map(|m| m[(0, 0)].abs().max(m[(1, 1)].abs()))
        .fold(0.0_f64, f64::max);
    report.push("gauge removes lambda from diagonal (exact)", diag_max, f64::MIN_POSITIVE);

    // Euclidean group frame consistency
    let c = wavy_loop(256)?;
    let data = euclidean_serret_frenet(&c)?;
    report.push("euclidean ||rho_x - rho K||", data.sf.verification_residual, tol.frame_consistency);

    // invariance suite: rigid motions and Moebius maps
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
    let inv = curvature_torsion(&c)?;
    let mut worst_rigid = 0.0_f64;
    for _ in 0..3 {
        let m = nalgebra::DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let qr = m.qr();
        let mut q = qr.q();
        if q.determinant() < 0.0 {
            let neg: Vec<f64> = q.column(0).iter().map(|v| -v).collect();
            q.set_column(0, &nalgebra::DVector::from_vec(neg));
        }
        let t = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ];
        let moved_pts: Vec<[f64; 3]> = c
            .points()
            .iter()
            .map(|p| {
                let v = nalgebra::Vector3::new(p[0], p[1], p[2]);
                let w = &q * v;
                [w[0] + t[0], w[1] + t[1], w[2] + t[2]]
            })
            .collect();
        let moved = EuclideanCurve::from_points(c.grid().clone(), &moved_pts)?;
        let inv2 = curvature_torsion(&moved)?;
        worst_rigid = worst_rigid
            .max(inv.kappa.sub(&inv2.kappa)?.norm_sup())
            .max(inv.tau.sub(&inv2.tau)?.norm_sup());
    }
    report.push("rigid motions leave (kappa, tau) fixed", worst_rigid, tol.euclidean_invariance);

    // Moebius invariance of S through the windowed path
    let s_ref = schwarzian(&u)?.s;
    let vals = u.values();
    let h = u.grid().dx();
    let mut worst_moebius = 0.0_f64;
    for _ in 0..3 {
        let g = loop {
            let g = [
                [1.0 + rng.gen_range(-0.2..0.2), rng.gen_range(-0.3..0.3)],
                [rng.gen_range(-0.04..0.04), 1.0 + rng.gen_range(-0.2..0.2)],
            ];
            let ok = vals
                .iter()
                .all(|&v| (g[1][0] * v + g[1][1]).abs() > 0.3);
            if ok && (g[0][0] * g[1][1] - g[0][1] * g[1][0]).abs() > 0.5 {
                break g;
            }
        };
        let moved: Vec<f64> = vals
            .iter()
            .map(|&v| (g[0][0] * v + g[0][1]) / (g[1][0] * v + g[1][1]))
            .collect();
        let s_win = window_schwarzian(&moved, h, 1e-12);
        for (j, s) in s_win.iter().enumerate() {
            if j >= 4 && j + 4 < s_win.len() {
                let sv = s.ok_or_else(|| {
                    Error::DegenerateCurve("transformed curve lost monotonicity".into())
                })?;
                worst_moebius = worst_moebius.max((sv - s_ref.values()[j]).abs());
            }
        }
    }
    report.push("Moebius maps leave S(u) fixed", worst_moebius, tol.moebius_invariance);

    // equivariance: rho(g.jet) = rho(jet) g^{-1} pointwise
    let u1 = u.derivative(1)?;
    let u2 = u.derivative(2)?;
    let g = [[1.05, 0.2], [0.1, 1.0]];
    let det: f64 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let sdet = det.sqrt();
    let gn = [
        [g[0][0] / sdet, g[0][1] / sdet],
        [g[1][0] / sdet, g[1][1] / sdet],
    ];
    let g_inv = nalgebra::Matrix2::new(gn[1][1], -gn[0][1], -gn[1][0], gn[0][0]);
    let mut worst_equiv = 0.0_f64;
    for j in 0..vals.len() {
        let jet = [vals[j], u1.values()[j], u2.values()[j], 0.0];
        let tj = moebius_jet(gn, jet);
        let rho_g = crate::frames::psl2_frame_from_jet(tj[0], tj[1], tj[2], lambda);
        let rho = crate::frames::psl2_frame_from_jet(jet[0], jet[1], jet[2], lambda);
        worst_equiv = worst_equiv.max((rho_g - rho * g_inv).abs().max());
    }
    report.push("frame equivariance rho(g.u) = rho(u) g^{-1}", worst_equiv, 1e-8);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_catalog_is_closed() {
        assert_eq!(SUITES.len(), 10);
        assert!(matches!(
            run_suite("no-such-suite", 1, &Tolerances::default()),
            Err(Error::UnknownName(_))
        ));
    }

    #[test]
    fn frames_suite_passes() {
        let rep = run_suite("frames", 7, &Tolerances::default()).unwrap();
        assert!(rep.pass, "failing checks: {:?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn conformal_suite_passes() {
        let rep = run_suite("conformal-cc", 7, &Tolerances::default()).unwrap();
        assert!(rep.pass, "failing checks: {:?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }
}
