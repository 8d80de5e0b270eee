use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chemostat_core::harness::{martingale_diagnostics, EnsembleSummary, QUANTITIES};
use chemostat_core::integrator::Trajectory;
use chemostat_core::io::{
    write_csv_file, write_ensemble_summary, write_failures, write_jumps, write_paths, write_sweep,
    write_trajectory, write_verdict,
};
use chemostat_core::model::check_h3;
use chemostat_core::{
    classify, crispify, ensemble_with, p_sweep, simulate, simulate_ode, validate, verify, CrispModel,
    EnsembleOptions, Error, ImpreciseModel, Scheme, SimConfig, State, SweepOptions, VerifyTolerances,
    DEFAULT_BOUNDARY_TOL,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Imprecise stochastic chemostat: thresholds, simulation and Monte Carlo
/// verification.
///
/// The model file (JSON) carries the parameters; flags carry the experiment.
/// Exit status: 0 success, 1 failed claim or simulation, 2 usage or
/// validation error.
#[derive(Debug, Parser)]
#[command(name = "chemostat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the model file and report the jump constants and (H3).
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        /// Exponent in the (H3) moment condition (must exceed 2).
        #[arg(long, default_value_t = 3.0)]
        theta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Print beta_i, R0s, R1s, the regime and its predictions.
    Thresholds {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        json: bool,
    },
    /// Integrate one stochastic path and write trajectory.csv.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Log)]
        scheme: SchemeArg,
        /// Also write the jump log to jumps.csv.
        #[arg(long)]
        jumps_csv: bool,
    },
    /// Integrate the deterministic system with RK4 and write trajectory.csv.
    Ode {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a Monte Carlo ensemble and write ensemble_summary.csv and paths.csv.
    Ensemble {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        par: ParArgs,
        #[arg(long, default_value_t = 100)]
        paths: usize,
    },
    /// Evaluate the model across a grid of imprecision levels; writes sweep.csv.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated imprecision levels in [0, 1].
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        p_grid: Vec<f64>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        par: ParArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// Paths per row; 0 computes thresholds only.
        #[arg(long, default_value_t = 0)]
        paths: usize,
    },
    /// Check an ensemble against the predicted asymptotics; writes verdict.csv.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        par: ParArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, default_value_t = 200)]
        paths: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Imprecision level in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    p: f64,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Horizon [default: 100, or 2000 for verify].
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record every n-th grid point [default: 1, or 1000 for ensemble, sweep and verify].
    #[arg(long)]
    stride: Option<usize>,
    /// Initial state S,x,y [default: S0,0.5,0.5].
    #[arg(long, value_parser = parse_state)]
    init: Option<[f64; 3]>,
}

fn parse_state(text: &str) -> Result<[f64; 3], String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three values S,x,y, got {}", v.len()))
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ParArgs {
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Tolerance file (JSON with any of rate, mean_rel, min_horizon, burn_in).
    #[arg(long)]
    tolerances: Option<PathBuf>,
    /// Absolute slack on Lyapunov-rate bounds.
    #[arg(long)]
    tol_rate: Option<f64>,
    /// Relative slack on time-average limits.
    #[arg(long)]
    tol_mean: Option<f64>,
    #[arg(long)]
    min_horizon: Option<f64>,
    /// Fraction of the horizon discarded before time averages.
    #[arg(long)]
    burn_in: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Log,
    Direct,
}

/// Why a command did not succeed; maps onto the exit status.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::InvalidModel(_)
            | Error::InvalidConfig(_)
            | Error::HorizonTooShort { .. }
            | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Validate { model, theta, json } => cmd_validate(&model, theta, json),
        Command::Thresholds { model, json } => cmd_thresholds(&model, json),
        Command::Simulate {
            model,
            sim,
            out,
            scheme,
            jumps_csv,
        } => cmd_simulate(&model, &sim, &out, scheme, jumps_csv),
        Command::Ode { model, sim, out } => cmd_ode(&model, &sim, &out),
        Command::Ensemble {
            model,
            sim,
            out,
            par,
            paths,
        } => cmd_ensemble(&model, &sim, &out, &par, paths),
        Command::Sweep {
            model,
            p_grid,
            sim,
            out,
            par,
            tol,
            paths,
        } => cmd_sweep(&model, &p_grid, &sim, &out, &par, &tol, paths),
        Command::Verify {
            model,
            sim,
            out,
            par,
            tol,
            paths,
            json,
        } => cmd_verify(&model, &sim, &out, &par, &tol, paths, json),
    }
}

fn load_imprecise(path: &Path) -> Result<ImpreciseModel, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read model file {}: {e}", path.display())))?;
    ImpreciseModel::from_json_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Loads, validates and crispifies the model.
fn load_crisp(args: &ModelArgs) -> Result<CrispModel, Failure> {
    let model = load_imprecise(&args.model)?;
    require_valid(&model)?;
    Ok(crispify(&model, args.p)?)
}

fn require_valid(model: &ImpreciseModel) -> Result<(), Failure> {
    let report = validate(model);
    if report.passed() {
        return Ok(());
    }
    let failed: Vec<String> = report.failures().map(|c| format!("{} ({})", c.name, c.detail)).collect();
    Err(Failure::Usage(format!("model failed validation: {}", failed.join(", "))))
}

fn sim_config(sim: &SimArgs, model: &CrispModel, default_t_end: f64, default_stride: usize) -> SimConfig {
    let initial = match sim.init {
        Some([s, x, y]) => State::new(s, x, y),
        None => State::new(model.s0, 0.5, 0.5),
    };
    SimConfig::new(initial, sim.t_end.unwrap_or(default_t_end), sim.dt, sim.seed)
        .with_stride(sim.stride.unwrap_or(default_stride))
}

fn tolerances(args: &TolArgs) -> Result<VerifyTolerances, Failure> {
    let mut tol = match &args.tolerances {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read tolerance file {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => VerifyTolerances::default(),
    };
    if let Some(v) = args.tol_rate {
        tol.rate = v;
    }
    if let Some(v) = args.tol_mean {
        tol.mean_rel = v;
    }
    if let Some(v) = args.min_horizon {
        tol.min_horizon = v;
    }
    if let Some(v) = args.burn_in {
        tol.burn_in = v;
    }
    Ok(tol)
}

fn out_dir(args: &OutArgs) -> Result<&Path, Failure> {
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
    Ok(&args.out)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn cmd_validate(args: &ModelArgs, theta: f64, json: bool) -> CmdResult {
    let model = load_imprecise(&args.model)?;
    let report = validate(&model);
    let h3 = if report.passed() {
        Some(check_h3(&crispify(&model, args.p)?, theta)?)
    } else {
        None
    };
    if json {
        println!("{}", to_json(&serde_json::json!({ "validation": report, "h3": h3 }))?);
    } else {
        for c in &report.checks {
            println!("{:<4} {:<26} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        if let Some(h) = h3 {
            println!(
                "{:<4} {:<26} theta = {}, zeta = {}, sigma^2 = {}, lhs = {} (at p = {})",
                if h.holds { "ok" } else { "warn" },
                "H3",
                h.theta,
                h.zeta,
                h.sigma_sq,
                h.lhs,
                args.p
            );
        }
    }
    require_valid(&model)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_thresholds(args: &ModelArgs, json: bool) -> CmdResult {
    let model = load_crisp(args)?;
    let report = classify(&model, DEFAULT_BOUNDARY_TOL);
    if json {
        println!("{}", to_json(&report)?);
    } else {
        println!("p = {}", args.p);
        print!("{report}");
    }
    Ok(ExitCode::SUCCESS)
}

fn write_trajectory_files(dir: &Path, traj: &Trajectory, model: &CrispModel, jumps: bool) -> Result<(), Failure> {
    write_csv_file(dir.join("trajectory.csv"), |w| write_trajectory(w, traj, model))?;
    if jumps {
        write_csv_file(dir.join("jumps.csv"), |w| write_jumps(w, traj))?;
    }
    Ok(())
}

fn print_trajectory(traj: &Trajectory, dir: &Path) {
    let s = traj.terminal_state();
    let m = traj.means.last().copied().unwrap_or_default();
    println!("t = {}  S = {}  x = {}  y = {}", traj.horizon(), s.s, s.x, s.y);
    println!("<S> = {}  <x> = {}  <y> = {}", m[0], m[1], m[2]);
    println!(
        "ln x/t = {}  ln y/t = {}  jumps = {}",
        traj.lyapunov_statistic(0),
        traj.lyapunov_statistic(1),
        traj.jumps.len()
    );
    println!("wrote {} rows to {}", traj.len(), dir.join("trajectory.csv").display());
}

fn cmd_simulate(args: &ModelArgs, sim: &SimArgs, out: &OutArgs, scheme: SchemeArg, jumps: bool) -> CmdResult {
    let model = load_crisp(args)?;
    let scheme = match scheme {
        SchemeArg::Log => Scheme::LogEuler,
        SchemeArg::Direct => Scheme::DirectEuler,
    };
    let config = sim_config(sim, &model, 100.0, 1).with_scheme(scheme);
    config.check()?;
    let traj = simulate(&model, &config)?;
    let dir = out_dir(out)?;
    write_trajectory_files(dir, &traj, &model, jumps)?;
    print_trajectory(&traj, dir);
    Ok(ExitCode::SUCCESS)
}

fn cmd_ode(args: &ModelArgs, sim: &SimArgs, out: &OutArgs) -> CmdResult {
    let model = load_crisp(args)?;
    let config = sim_config(sim, &model, 100.0, 1);
    config.check_ode()?;
    let traj = simulate_ode(&model, &config)?;
    let dir = out_dir(out)?;
    write_trajectory_files(dir, &traj, &model, false)?;
    print_trajectory(&traj, dir);
    Ok(ExitCode::SUCCESS)
}

fn write_ensemble_files(dir: &Path, summary: &EnsembleSummary) -> Result<(), Failure> {
    write_csv_file(dir.join("ensemble_summary.csv"), |w| write_ensemble_summary(w, summary))?;
    write_csv_file(dir.join("paths.csv"), |w| write_paths(w, summary))?;
    if !summary.failures.is_empty() {
        write_csv_file(dir.join("failures.csv"), |w| write_failures(w, summary))?;
    }
    Ok(())
}

fn print_ensemble(summary: &EnsembleSummary) {
    println!(
        "{} paths to t = {} ({} failed)",
        summary.n_paths,
        summary.horizon,
        summary.failures.len()
    );
    println!("{:<12} {:>14} {:>14} {:>14} {:>14}", "terminal", "mean", "p5", "p50", "p95");
    for q in QUANTITIES {
        if let Some(b) = summary.terminal_band(q) {
            println!("{q:<12} {:>14.6} {:>14.6} {:>14.6} {:>14.6}", b.mean, b.p5, b.p50, b.p95);
        }
    }
    let f = summary.terminal_extinct_fraction();
    println!("extinct fraction: x {}  y {}", f[0], f[1]);
    let d = martingale_diagnostics(&summary.martingale_terms(), summary.horizon);
    println!(
        "mean M_i(T)/T {:?}  mean M~_i(T)/T {:?}",
        d.brownian_mean, d.jump_mean
    );
}

fn cmd_ensemble(args: &ModelArgs, sim: &SimArgs, out: &OutArgs, par: &ParArgs, paths: usize) -> CmdResult {
    let model = load_crisp(args)?;
    let config = sim_config(sim, &model, 100.0, 1000);
    config.check()?;
    let options = EnsembleOptions { workers: par.workers };
    let summary = ensemble_with(&model, &config, paths, &options)?;
    let dir = out_dir(out)?;
    write_ensemble_files(dir, &summary)?;
    print_ensemble(&summary);
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    path: &Path,
    p_grid: &[f64],
    sim: &SimArgs,
    out: &OutArgs,
    par: &ParArgs,
    tol: &TolArgs,
    paths: usize,
) -> CmdResult {
    let model = load_imprecise(path)?;
    require_valid(&model)?;
    let probe = crispify(&model, 0.0)?;
    let config = sim_config(sim, &probe, 100.0, 1000);
    if paths > 0 {
        config.check()?;
    }
    let options = SweepOptions {
        tolerances: tolerances(tol)?,
        ensemble: EnsembleOptions { workers: par.workers },
    };
    let rows = p_sweep(&model, p_grid, &config, paths, &options)?;
    let dir = out_dir(out)?;
    write_csv_file(dir.join("sweep.csv"), |w| write_sweep(w, &rows))?;
    println!("{:>8} {:>14} {:>14}  {:<18} verdict", "p", "R0s", "R1s", "regime");
    let mut failed = false;
    for r in &rows {
        let (r0, r1, regime) = r
            .report
            .as_ref()
            .map(|t| (t.r0s, t.r1s, t.regime.to_string()))
            .unwrap_or((f64::NAN, f64::NAN, "-".into()));
        let verdict = match (&r.verdict, &r.error) {
            (_, Some(e)) => {
                failed = true;
                format!("error: {e}")
            }
            (Some(v), None) => {
                failed |= !v.passed();
                if v.passed() { "PASS" } else { "FAIL" }.to_string()
            }
            (None, None) => "-".into(),
        };
        println!("{:>8} {:>14.8} {:>14.8}  {:<18} {verdict}", r.p, r0, r1, regime);
    }
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_verify(
    args: &ModelArgs,
    sim: &SimArgs,
    out: &OutArgs,
    par: &ParArgs,
    tol: &TolArgs,
    paths: usize,
    json: bool,
) -> CmdResult {
    let model = load_crisp(args)?;
    let tol = tolerances(tol)?;
    let config = sim_config(sim, &model, 2000.0, 1000);
    config.check()?;
    if config.t_end < tol.min_horizon {
        return Err(Error::HorizonTooShort {
            horizon: config.t_end,
            min_horizon: tol.min_horizon,
        }
        .into());
    }
    let report = classify(&model, DEFAULT_BOUNDARY_TOL);
    let summary = ensemble_with(&model, &config, paths, &EnsembleOptions { workers: par.workers })?;
    let verdict = verify(&report, &summary, &tol)?;
    let dir = out_dir(out)?;
    write_ensemble_files(dir, &summary)?;
    write_csv_file(dir.join("verdict.csv"), |w| write_verdict(w, &verdict))?;
    if json {
        println!("{}", to_json(&serde_json::json!({ "thresholds": report, "verdict": verdict }))?);
    } else {
        print!("{report}");
        println!("{verdict}");
    }
    Ok(if verdict.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
