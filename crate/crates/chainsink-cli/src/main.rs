//! Command-line front end: simulate single points, locate λ_QC, run
//! parameter sweeps from a config file, and regenerate figure datasets.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 non-convergence,
//! 4 root bracket without a sign change.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chainsink::analysis::{
    find_lambda_qc, integrated_coherence, max_coherence, run_point_trajectories,
};
use chainsink::dynamics::{propagate, PropagationControls, TMax, Trajectory};
use chainsink::error::Error;
use chainsink::model::{build_reduced_generator, BaseParams, Scenario};
use chainsink::operators::{initial_state, Representation};
use chainsink::sweep::{
    reproduce_figure, reproduce_from_meta, run_sweep, write_summary_csv, FigureId, SweepConfig,
};

#[derive(Parser)]
#[command(name = "chainsink", version, about = "Quantum vs classical energy transport in qubit chains with a terminal sink")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one parameter point and report its quantifiers.
    Simulate(SimulateArgs),
    /// Find the coupling at which quantum and classical efficiencies agree.
    FindLambdaQc(FindLambdaQcArgs),
    /// Evaluate a parameter grid described by a TOML config file.
    Sweep(SweepArgs),
    /// Regenerate a figure dataset (or rerun one from its meta file).
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Quantum,
    Classical,
    Both,
}

#[derive(Args)]
struct ParamArgs {
    /// Number of chain sites (sink excluded).
    #[arg(long)]
    n: usize,
    /// Inter-site coupling strength λ.
    #[arg(long)]
    lambda: f64,
    /// Local dephasing rate γ.
    #[arg(long)]
    gamma: f64,
    /// Local dissipation rate Γ.
    #[arg(long)]
    big_gamma: f64,
    /// Sink transfer rate Γ_s.
    #[arg(long)]
    gamma_sink: f64,
    /// Site energy ω (observables do not depend on it).
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<BaseParams, Error> {
        BaseParams::new(
            self.n,
            self.omega,
            self.lambda,
            self.gamma,
            self.big_gamma,
            self.gamma_sink,
        )
    }
}

#[derive(Args)]
struct ControlArgs {
    /// Integration horizon: `auto` (run to steady state) or a time.
    #[arg(long, default_value = "auto", value_parser = parse_t_max)]
    t_max: TMax,
    /// Observable sampling interval (default 0.01 over the fastest rate).
    #[arg(long)]
    record_every: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    /// Residual chain excitation treated as converged.
    #[arg(long, default_value_t = 1e-7)]
    steady_eps: f64,
}

impl ControlArgs {
    fn controls(&self) -> PropagationControls {
        PropagationControls {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            dt_initial: None,
            t_max: self.t_max,
            steady_eps: self.steady_eps,
            record_every: self.record_every,
        }
    }
}

fn parse_t_max(s: &str) -> Result<TMax, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(TMax::Auto);
    }
    s.parse::<f64>()
        .map(TMax::Fixed)
        .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Trajectory CSV destination; `both` writes `<stem>_quantum.csv` and
    /// `<stem>_classical.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    controls: ControlArgs,
}

#[derive(Args)]
struct FindLambdaQcArgs {
    /// Number of chain sites (sink excluded).
    #[arg(long)]
    n: usize,
    /// Local dephasing rate γ.
    #[arg(long)]
    gamma: f64,
    /// Local dissipation rate Γ.
    #[arg(long)]
    big_gamma: f64,
    /// Sink transfer rate Γ_s.
    #[arg(long)]
    gamma_sink: f64,
    /// Site energy ω.
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
    /// Search bracket `lo,hi` for λ.
    #[arg(long, value_parser = parse_bracket)]
    bracket: (f64, f64),
    /// Bracket width in λ at which the search stops.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Optional CSV of every (lambda, eta_diff) evaluation.
    #[arg(long)]
    points_out: Option<PathBuf>,
    #[command(flatten)]
    controls: ControlArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file (see README for the schema).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long, default_value = "sweep_data.csv")]
    out: PathBuf,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Print the resolved config as TOML and exit without running.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ReproduceSource {
    /// Figure id: fig2..fig9.
    #[arg(long, value_parser = parse_figure)]
    figure: Option<FigureId>,
    /// Regenerate from a previously written `<id>_meta.json`.
    #[arg(long)]
    from_meta: Option<PathBuf>,
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse::<FigureId>().map_err(|e| e.to_string())
}

#[derive(Args)]
struct ReproduceArgs {
    #[command(flatten)]
    source: ReproduceSource,
    /// Output directory for data and meta files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::FindLambdaQc(args) => cmd_find_lambda_qc(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Reproduce(args) => cmd_reproduce(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter { .. }
        | Error::SiteOutOfRange { .. }
        | Error::DimensionMismatch(_)
        | Error::GridMismatch(_)
        | Error::Meta(_) => 2,
        Error::NotConverged { .. } => 3,
        Error::BracketFailure { .. } => 4,
        Error::Scenario { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), Error> {
    let mut buf = String::from("t,p_sink,coherence\n");
    for i in 0..traj.len() {
        buf.push_str(&format!(
            "{},{},{}\n",
            traj.times[i], traj.sink_population[i], traj.coherence[i]
        ));
    }
    std::fs::write(path, buf)?;
    Ok(())
}

fn single_scenario_out(out: &Path) -> PathBuf {
    out.to_path_buf()
}

fn both_scenario_out(out: &Path, scenario: Scenario) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".to_owned());
    let name = format!("{stem}_{}.csv", scenario.label());
    match out.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(name),
        _ => PathBuf::from(name),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let params = args.params.params()?;
    let ctrl = args.controls.controls();
    ctrl.validate()?;

    match args.scenario {
        ScenarioArg::Both => {
            let (summary, traj_q, traj_c) = run_point_trajectories(&params, &ctrl)?;
            if let Some(out) = &args.out {
                write_trajectory_csv(&both_scenario_out(out, Scenario::Quantum), &traj_q)?;
                write_trajectory_csv(&both_scenario_out(out, Scenario::Classical), &traj_c)?;
            }
            println!(
                "eta_q={} eta_c={} eta_diff={} I={} C_max={} t_Cmax={} tau={}",
                fmt6(summary.eta_q),
                fmt6(summary.eta_c),
                fmt6(summary.eta_diff),
                fmt6(summary.integrated_coherence),
                fmt6(summary.max_coherence),
                fmt6(summary.max_coherence_time),
                summary
                    .intersection_time
                    .map(fmt6)
                    .unwrap_or_else(|| "-".to_owned()),
            );
            if !summary.converged {
                return Err(Error::NotConverged {
                    t: traj_q.termination_time.max(traj_c.termination_time),
                    residual: traj_q.chain_residual.max(traj_c.chain_residual),
                });
            }
        }
        ScenarioArg::Quantum | ScenarioArg::Classical => {
            let scenario = if args.scenario == ScenarioArg::Quantum {
                Scenario::Quantum
            } else {
                Scenario::Classical
            };
            let spec = params.spec(scenario);
            let gen =
                build_reduced_generator(&spec).map_err(|e| e.in_scenario(scenario.label()))?;
            let s0 = initial_state(&spec, Representation::ReducedSingleExcitation);
            let traj =
                propagate(&gen, &s0, &ctrl).map_err(|e| e.in_scenario(scenario.label()))?;
            if let Some(out) = &args.out {
                write_trajectory_csv(&single_scenario_out(out), &traj)?;
            }
            let eta = *traj.sink_population.last().unwrap_or(&f64::NAN);
            let (c_max, t_c_max) = max_coherence(&traj);
            let i_phi = if traj.converged {
                integrated_coherence(&traj)?.value
            } else {
                f64::NAN
            };
            println!(
                "scenario={} eta={} I={} C_max={} t_Cmax={}",
                scenario.label(),
                fmt6(eta),
                fmt6(i_phi),
                fmt6(c_max),
                fmt6(t_c_max),
            );
            if !traj.converged {
                return Err(Error::NotConverged {
                    t: traj.termination_time,
                    residual: traj.chain_residual,
                });
            }
        }
    }
    Ok(())
}

fn cmd_find_lambda_qc(args: &FindLambdaQcArgs) -> Result<(), Error> {
    let params = BaseParams::new(
        args.n,
        args.omega,
        1.0,
        args.gamma,
        args.big_gamma,
        args.gamma_sink,
    )?;
    let ctrl = args.controls.controls();
    let result = find_lambda_qc(&params, args.bracket, args.tol, &ctrl)?;
    if let Some(path) = &args.points_out {
        let mut buf = String::from("lambda,eta_diff\n");
        for (lam, diff) in &result.evaluations {
            buf.push_str(&format!("{lam},{diff}\n"));
        }
        std::fs::write(path, buf)?;
    }
    println!(
        "lambda_qc={} residual={:e} evaluations={}",
        fmt6(result.lambda_qc),
        result.residual,
        result.evaluations.len()
    );
    Ok(())
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match workers {
        None => f(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("worker pool")
            .install(f),
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let config: SweepConfig = toml::from_str(&text).map_err(|e| Error::InvalidParameter {
        name: "config",
        reason: e.to_string(),
    })?;
    let plan = config.plan();
    plan.validate()?;
    config.controls.validate()?;

    if args.dump_config {
        let dump = toml::to_string_pretty(&config).map_err(|e| Error::Meta(e.to_string()))?;
        print!("{dump}");
        return Ok(());
    }

    let started = Instant::now();
    let summaries = with_workers(args.workers, || run_sweep(&plan, &config.controls))?;
    write_summary_csv(&args.out, &summaries)?;
    println!(
        "rows={} elapsed={:.3}s out={}",
        summaries.len(),
        started.elapsed().as_secs_f64(),
        args.out.display()
    );
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), Error> {
    let started = Instant::now();
    let output = with_workers(args.workers, || match (&args.source.figure, &args.source.from_meta) {
        (Some(id), None) => reproduce_figure(*id, &args.out_dir, &PropagationControls::default()),
        (None, Some(meta)) => reproduce_from_meta(meta, &args.out_dir),
        _ => unreachable!("clap enforces exactly one source"),
    })?;
    println!(
        "figure files={} rows={} elapsed={:.3}s meta={}",
        output.data_files.len(),
        output.rows,
        started.elapsed().as_secs_f64(),
        output.meta_file.display()
    );
    Ok(())
}
