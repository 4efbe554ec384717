//! geomflow: experiment runner for invariant curve flows.
//!
//! Subcommands: `simulate` (integrate a flow, write snapshots + invariant
//! histories), `verify` (run a named verification suite), `invariants`
//! (compute invariant fields of a curve file). Exit codes: 0 success,
//! 1 configuration/schema error, 2 blow-up (last finite snapshot saved).

use clap::{Args, Parser, Subcommand};
use geomflow_core::curves::{Curve, EuclideanCurve, ProjectiveCurve};
use geomflow_core::flows::{run_flow, suggested_dt, FlowOptions, FlowSpec, RunStatus};
use geomflow_core::invariants::{
    centroaffine_curvature, curvature_torsion, hasimoto, lagrangian_schwarzian, schwarzian,
};
use geomflow_core::numerics::PeriodicGrid;
use geomflow_core::tolerances::Tolerances;
use geomflow_core::verify::{run_suite, SUITES};
use geomflow_core::{io as gio, Error};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geomflow", version, about = "invariant curve flow laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a flow and record snapshots and invariant histories.
    Simulate(SimulateArgs),
    /// Run a verification suite and write its JSON report.
    Verify(VerifyArgs),
    /// Compute invariant fields of a curve file.
    Invariants(InvariantsArgs),
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimulateArgs {
    /// Flow name: vortex-filament | euclidean-hg | schwarzian-kdv |
    /// schwarzian-kdv-lambda | sawada-kotera-realization | lagrangian-skdv |
    /// pinkall-star
    #[arg(long)]
    flow: Option<String>,
    /// Curve CSV (with JSON sidecar next to it); defaults per flow geometry.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Grid size for the default initial data.
    #[arg(long)]
    n: Option<usize>,
    /// Period for the default initial data.
    #[arg(long)]
    period: Option<f64>,
    /// Time step (defaults to the stability heuristic).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Snapshot stride in steps.
    #[arg(long)]
    stride: Option<usize>,
    /// Spectral parameter for lambda-dependent flows.
    #[arg(long)]
    lambda: Option<f64>,
    /// Exponent of lambda in the realization coefficient (2 by default).
    #[arg(long)]
    exponent: Option<u32>,
    /// 2/3-rule dealiasing of the vector field.
    #[arg(long)]
    dealias: Option<bool>,
    /// RNG seed recorded in the manifest (reserved for stochastic configs).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $GEOMFLOW_OUT or ./geomflow-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags override its entries.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of the named suites; see --list.
    suite: Option<String>,
    #[arg(long)]
    list: bool,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// For akns-kdv: check a recorded simulate output directory instead of
    /// running the built-in trajectory.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Spectral parameter for --run-dir checks.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct InvariantsArgs {
    /// Curve CSV (JSON sidecar describes the geometry).
    #[arg(long)]
    input: PathBuf,
    /// Expected geometry; mismatch with the sidecar is an error.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Invariants(args) => cmd_invariants(args),
    };
    match code {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn out_dir(explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .or_else(|| std::env::var_os("GEOMFLOW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("geomflow-out"))
}

fn merge_config(mut args: SimulateArgs) -> Result<SimulateArgs, Error> {
    if let Some(path) = args.config.clone() {
        let text = std::fs::read_to_string(&path)?;
        let file: SimulateArgs = serde_json::from_str(&text)?;
        args.flow = args.flow.or(file.flow);
        args.curve = args.curve.or(file.curve);
        args.n = args.n.or(file.n);
        args.period = args.period.or(file.period);
        args.dt = args.dt.or(file.dt);
        args.steps = args.steps.or(file.steps);
        args.stride = args.stride.or(file.stride);
        args.lambda = args.lambda.or(file.lambda);
        args.exponent = args.exponent.or(file.exponent);
        args.dealias = args.dealias.or(file.dealias);
        args.seed = args.seed.or(file.seed);
        args.out = args.out.or(file.out);
    }
    Ok(args)
}

fn default_curve(spec: &FlowSpec, n: usize, period: f64) -> Result<Curve, Error> {
    let grid = PeriodicGrid::new(n, period)?;
    let omega = 2.0 * std::f64::consts::PI / period;
    Ok(match spec.geometry() {
        "projective" => {
            Curve::Projective(ProjectiveCurve::from_fn(grid, 1.0, move |x| 0.1 * (omega * x).sin())?)
        }
        "euclidean" => {
            let c = EuclideanCurve::from_fn(grid, move |t| {
                let a = omega * t;
                [
                    (1.0 + 0.1 * (2.0 * a).cos()) * a.cos(),
                    (1.0 + 0.1 * (2.0 * a).cos()) * a.sin(),
                    0.1 * (2.0 * a).sin(),
                ]
            })?;
            Curve::Euclidean(geomflow_core::curves::reparametrize_arclength(&c)?)
        }
        "star" => {
            let u = ProjectiveCurve::from_fn(grid, 1.0, move |x| 0.1 * (omega * x).sin())?;
            Curve::Star(geomflow_core::curves::projective_to_star(&u)?)
        }
        "lagrangian" => {
            let ua =
                ProjectiveCurve::from_fn(grid.clone(), 1.0, move |x| 0.1 * (omega * x).sin())?;
            let ub = ProjectiveCurve::from_fn(grid, 1.0, move |x| 0.08 * (omega * x).cos())?;
            Curve::Lagrangian(geomflow_core::curves::LagrangianCurve::diagonal(&[ua, ub])?)
        }
        other => return Err(Error::UnknownName(other.to_string())),
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let args = merge_config(args)?;
    let flow_name = args
        .flow
        .clone()
        .ok_or_else(|| Error::InvalidInput("missing required key `flow`".into()))?;
    let lambda = args.lambda.unwrap_or(0.0);
    let exponent = args.exponent.unwrap_or(2);
    let spec = FlowSpec::from_name(&flow_name, lambda, exponent)?;

    let curve = match &args.curve {
        Some(path) => {
            let c = gio::read_curve(path)?;
            if c.geometry() != spec.geometry() {
                return Err(Error::InvalidInput(format!(
                    "flow `{flow_name}` needs a {} curve, file `{}` holds {}",
                    spec.geometry(),
                    path.display(),
                    c.geometry()
                )));
            }
            c
        }
        None => default_curve(
            &spec,
            args.n.unwrap_or(256),
            args.period.unwrap_or(2.0 * std::f64::consts::PI),
        )?,
    };

    let dt = match args.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(bad) => {
            return Err(Error::InvalidInput(format!("key `dt` must be positive, got {bad}")))
        }
        None => suggested_dt(&spec, &curve)?,
    };
    let steps = args.steps.unwrap_or(100);
    let stride = args.stride.unwrap_or_else(|| (steps / 10).max(1));
    let options = FlowOptions { dealias: args.dealias.unwrap_or(false), reparametrize: true };

    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir)?;

    let run = run_flow(&spec, &curve, dt, steps, stride, &options)?;

    for (i, snap) in run.snapshots.iter().enumerate() {
        gio::write_curve(&dir.join(format!("snapshot_{i:04}.csv")), snap)?;
    }
    for (name, rows) in &run.invariant_histories {
        gio::write_time_series(&dir.join(format!("history_{name}.csv")), &run.times, rows)?;
    }
    let status = match &run.status {
        RunStatus::Completed => serde_json::json!({"kind": "completed"}),
        RunStatus::BlowUp { step, time } => {
            serde_json::json!({"kind": "blow-up", "step": step, "time": time})
        }
        RunStatus::GenericityLost { step, time, detail } => {
            serde_json::json!({"kind": "genericity-lost", "step": step, "time": time, "detail": detail})
        }
    };
    let manifest = serde_json::json!({
        "flow": run.flow,
        "geometry": spec.geometry(),
        "lambda": lambda,
        "exponent": exponent,
        "grid": {"n": curve.grid().len(), "period": curve.grid().length()},
        "dt": dt,
        "steps": steps,
        "stride": stride,
        "dealias": options.dealias,
        "seed": args.seed.unwrap_or(0),
        "curve_file": args.curve.as_ref().map(|p| p.display().to_string()),
        "snapshots": run.snapshots.len(),
        "times": run.times,
        "status": status,
        "arclength_drift": run.arclength_drift,
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;

    match run.status {
        RunStatus::Completed => Ok(ExitCode::SUCCESS),
        _ => {
            eprintln!("run aborted: {:?} (last finite snapshot saved)", run.status);
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    if args.list {
        for s in SUITES {
            println!("{s}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let suite = args
        .suite
        .ok_or_else(|| Error::InvalidInput("missing suite name (try --list)".into()))?;
    if !SUITES.contains(&suite.as_str()) {
        eprintln!("error: unknown suite `{suite}`");
        return Ok(ExitCode::from(1));
    }
    if let Some(dir) = &args.run_dir {
        if suite != "akns-kdv" {
            return Err(Error::InvalidInput("--run-dir only applies to akns-kdv".into()));
        }
        return verify_recorded_akns(dir, args.lambda, &out_dir(&args.out));
    }
    let report = run_suite(&suite, args.seed, &Tolerances::default())?;
    for c in &report.checks {
        let mark = if c.pass { "pass" } else { "FAIL" };
        println!("[{mark}] {}: {:.3e} (tol {:.1e})", c.name, c.residual, c.tolerance);
    }
    println!("suite {}: {}", report.suite, if report.pass { "pass" } else { "FAIL" });
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(
        dir.join(format!("verify_{suite}.json")),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Zero-curvature check of a recorded projective run: reads the manifest
/// and snapshot files, builds the KdV pair, reports {lambda, residual,
/// stencil_order_estimate} (the order estimate subsamples the snapshots).
fn verify_recorded_akns(
    dir: &Path,
    lambda: Option<f64>,
    out: &Path,
) -> Result<ExitCode, Error> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let lambda = lambda.or_else(|| manifest["lambda"].as_f64()).ok_or_else(|| {
        Error::InvalidInput("manifest carries no lambda; pass --lambda".into())
    })?;
    let times: Vec<f64> = manifest["times"]
        .as_array()
        .ok_or_else(|| Error::InvalidInput("manifest has no times array".into()))?
        .iter()
        .filter_map(|v| v.as_f64())
        .collect();
    let mut history = Vec::with_capacity(times.len());
    for (i, t) in times.iter().enumerate() {
        let curve = gio::read_curve(&dir.join(format!("snapshot_{i:04}.csv")))?;
        match curve {
            Curve::Projective(u) => history.push((*t, u)),
            other => {
                return Err(Error::InvalidInput(format!(
                    "snapshot {i} is {}, expected projective",
                    other.geometry()
                )))
            }
        }
    }
    let report = geomflow_core::verify::akns_report_from_history(&history, lambda)?;
    println!(
        "lambda {}: residual {:.3e}, stencil order estimate {}",
        lambda,
        report.residual,
        report
            .stencil_order_estimate
            .map(|o| format!("{o:.2}"))
            .unwrap_or_else(|| "n/a".into()),
    );
    std::fs::create_dir_all(out)?;
    std::fs::write(
        out.join("akns_residual.json"),
        serde_json::to_string_pretty(&report)? + "
",
    )?;
    let tol = Tolerances::default().akns_residual;
    Ok(if report.residual < tol { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn write_invariant_columns(
    dir: &Path,
    stem: &str,
    grid: &PeriodicGrid,
    cols: &[(&str, &[f64])],
) -> Result<(), Error> {
    gio::write_columns(&dir.join(format!("{stem}.csv")), grid, cols)
}

fn cmd_invariants(args: InvariantsArgs) -> Result<ExitCode, Error> {
    let curve = gio::read_curve(&args.input)?;
    if let Some(expect) = &args.geometry {
        if expect != curve.geometry() {
            return Err(Error::InvalidInput(format!(
                "expected geometry `{expect}`, file holds `{}`",
                curve.geometry()
            )));
        }
    }
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir)?;
    let mut manifest = serde_json::json!({
        "input": args.input.display().to_string(),
        "geometry": curve.geometry(),
    });
    match &curve {
        Curve::Euclidean(c) => {
            let inv = curvature_torsion(c)?;
            write_invariant_columns(
                &dir,
                "invariants_euclidean",
                c.grid(),
                &[("kappa", inv.kappa.values()), ("tau", inv.tau.values())],
            )?;
            let nat = hasimoto(&inv, 0.0)?;
            write_invariant_columns(
                &dir,
                "invariants_natural",
                c.grid(),
                &[("nu", &nat.nu), ("eta", &nat.eta)],
            )?;
            gio::write_complex_grid_function(&dir.join("invariants_psi.csv"), &nat.psi)?;
            manifest["gauge_base"] = serde_json::json!(nat.gauge_base);
            manifest["phase_slope"] = serde_json::json!(nat.phase_slope);
        }
        Curve::Projective(u) => {
            let s = schwarzian(u)?;
            write_invariant_columns(
                &dir,
                "invariants_projective",
                u.grid(),
                &[("schwarzian", s.s.values())],
            )?;
        }
        Curve::Star(c) => {
            let p = centroaffine_curvature(c)?;
            write_invariant_columns(&dir, "invariants_star", c.grid(), &[("p", p.p.values())])?;
            manifest["residual"] = serde_json::json!(p.residual);
        }
        Curve::Lagrangian(c) => {
            let ls = lagrangian_schwarzian(c)?;
            let cols: Vec<(String, &[f64])> = ls
                .s_d
                .iter()
                .enumerate()
                .map(|(i, f)| (format!("s_d{i}"), f.values()))
                .collect();
            let col_refs: Vec<(&str, &[f64])> =
                cols.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            write_invariant_columns(&dir, "invariants_lagrangian", c.grid(), &col_refs)?;
            manifest["eigenvalue_ordering"] =
                serde_json::json!("ascending at x = 0, then maximal-overlap tracking");
            manifest["near_degenerate"] = serde_json::json!(ls.near_degenerate);
        }
    }
    std::fs::write(
        dir.join("invariants_manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(ExitCode::SUCCESS)
}
