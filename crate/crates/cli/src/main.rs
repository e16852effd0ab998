//! Command-line driver: configure instances and solvers, run single solves,
//! run the feasibility benchmark sweep, compare methods, emit CSV traces,
//! and run schedule/bound/gap-reduction checks.
//!
//! Exit codes: 0 on success (for `solve`: an epsilon-solution), 2 when a
//! solve stopped at the iteration cap, 1 on errors and failed checks.

mod checks;
mod config;
mod csvout;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use splitgap::gap::{epsilon_solution_check, Verdict};
use splitgap::trace::{StopReason, Trace};

use config::{Algo, FileConfig, ProblemKind, RunConfig};

#[derive(Parser)]
#[command(name = "splitgap", version, about = "Smoothing alternating-direction solvers and baselines")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one instance and write its trace as CSV.
    Solve(SolveArgs),
    /// Run the half-plane feasibility benchmark sweep.
    Bench(BenchArgs),
    /// Run several solvers on the same instance and print a summary table.
    Compare(CompareArgs),
    /// Verify schedule conditions, convergence bounds, or gap reduction.
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Problem kind.
    #[arg(long, value_enum)]
    problem: Option<ProblemKind>,
    /// Constraint dimension of the feasibility instance.
    #[arg(long)]
    n: Option<usize>,
    /// Tangent angle of the feasibility instance.
    #[arg(long)]
    angle: Option<f64>,
    /// Domain ball radius of the feasibility instance.
    #[arg(long)]
    radius: Option<f64>,
    /// Side dimension of box-lp / composite instances.
    #[arg(long)]
    dim: Option<usize>,
    /// Strong convexity modulus of the sc-quad instance.
    #[arg(long)]
    mu: Option<f64>,
    /// Instance seed (defaults to the run seed).
    #[arg(long)]
    problem_seed: Option<u64>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Initial smoothness parameter (defaults to ||A||).
    #[arg(long)]
    gamma1: Option<f64>,
    /// Fixed penalty for the classical baselines.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "max-iter", alias = "max-iters")]
    max_iters: Option<usize>,
    /// Epsilon-solution accuracy (stopping test).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record the smoothed gap and gap-reduction columns.
    #[arg(long)]
    record_gap: bool,
    /// Use the printed (condition-violating) SADMM beta schedule.
    #[arg(long)]
    paper_beta: bool,
    /// Record every m-th iterate.
    #[arg(long)]
    thin: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    /// Config file (flags override file values).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Trace output path (CSV).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated tangent angles.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-1, 1e-2, 1e-3, 1e-4])]
    angles: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long = "max-iter", alias = "max-iters", default_value_t = 5000)]
    max_iters: usize,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', value_enum,
          default_values_t = vec![Algo::Sama, Algo::Sadmm, Algo::AdmmFeas, Algo::Dykstra, Algo::Haugazeau])]
    algos: Vec<Algo>,
    /// Directory for per-run CSV traces.
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Slope-fit window `lo,hi` (iterations).
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 5000])]
    window: Vec<usize>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_delimiter = ',', value_enum, required = true)]
    algos: Vec<Algo>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(subcommand)]
    kind: CheckKind,
}

#[derive(Subcommand)]
enum CheckKind {
    /// Substitute a schedule into its conditions for k = 1..k_max.
    Schedule {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value_t = 1_000_000)]
        k_max: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 1.0)]
        norm_a: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        l_b: f64,
        #[arg(long)]
        paper_beta: bool,
    },
    /// Rerun a solve asserting its convergence bounds on every iterate.
    Bounds {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        algo: Option<Algo>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Rerun a solve asserting the gap-reduction inequality per iterate.
    GapReduction {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        algo: Option<Algo>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn resolve_config(
    config: Option<PathBuf>,
    algo: Option<Algo>,
    problem: &ProblemArgs,
    solver: &SolverArgs,
    output: Option<PathBuf>,
) -> Result<RunConfig> {
    let file = config.map(|p| FileConfig::load(&p)).transpose()?;
    config::resolve(
        file,
        algo,
        problem.problem,
        problem.n,
        problem.angle,
        problem.radius,
        problem.dim,
        problem.mu,
        problem.problem_seed,
        solver.gamma1,
        solver.rho,
        solver.max_iters,
        solver.eps,
        solver.seed,
        solver.record_gap,
        solver.paper_beta,
        output,
        solver.thin,
    )
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let config = resolve_config(args.config, args.algo, &args.problem, &args.solver, args.output)?;
    let result = runner::run(&config)?;
    if let Some(path) = &config.output {
        csvout::write_csv(&result.trace, path)?;
        println!("trace written to {}", path.display());
    }
    let last = result
        .trace
        .last()
        .ok_or_else(|| anyhow::anyhow!("empty trace"))?;
    let (pv, fv, dv) = epsilon_solution_check(last, config.eps);
    let show = |v: Option<f64>| match v {
        Some(x) => format!("{x:.6e}"),
        None => "n/a".to_string(),
    };
    println!(
        "{} on {:?} (seed {}): stopped after {} iterations ({:?})",
        config.algo.name(),
        config.problem.kind,
        config.seed,
        result.outcome.iterations,
        result.outcome.stop
    );
    println!(
        "  primal residual {} [{}], feasibility gap {:.6e} [{}], dual residual {} [{}]",
        show(last.primal_obj_residual),
        verdict(pv),
        last.feasibility_gap,
        verdict(fv),
        show(last.dual_obj_residual),
        verdict(dv),
    );
    Ok(match result.outcome.stop {
        StopReason::EpsilonSolution => 0,
        StopReason::MaxIters => 2,
    })
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "ok",
        Verdict::Fail => "above eps",
        Verdict::Unknown => "unknown",
    }
}

fn angle_label(angle: f64) -> String {
    format!("{angle:e}").replace('-', "m")
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    anyhow::ensure!(args.window.len() == 2, "--window takes exactly two values: lo,hi");
    let window = (args.window[0], args.window[1]);
    std::fs::create_dir_all(&args.out_dir)?;
    struct BenchRun {
        algo: Algo,
        angle: f64,
        trace: Trace,
    }
    let mut jobs = Vec::new();
    for &angle in &args.angles {
        for &algo in &args.algos {
            jobs.push((algo, angle));
        }
    }
    // Runs are independent and deterministic; execute them concurrently.
    let results: Vec<Result<BenchRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(algo, angle)| {
                scope.spawn(move || -> Result<BenchRun> {
                    let config = RunConfig {
                        algo,
                        problem: config::ProblemSettings {
                            kind: ProblemKind::Feasibility,
                            n: args.n,
                            angle,
                            radius: args.radius,
                            dim: 2,
                            mu: 1.0,
                            seed: 0,
                        },
                        gamma1: None,
                        rho: 1.0,
                        max_iters: args.max_iters,
                        eps: -1.0, // benchmark runs never stop early
                        seed: 0,
                        record_gap: false,
                        paper_beta: false,
                        output: None,
                        thin: 1,
                    };
                    let result = runner::run(&config)?;
                    Ok(BenchRun {
                        algo,
                        angle,
                        trace: result.trace,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("no panics")).collect()
    });

    println!(
        "{:>10} {:>9} {:>14} {:>14} {:>9}",
        "algo", "angle", "dual@final", "dual@2000", "slope"
    );
    for result in results {
        let run = result?;
        let path = args.out_dir.join(format!(
            "feasibility_n{}_angle{}_{}.csv",
            args.n,
            angle_label(run.angle),
            run.algo.name()
        ));
        csvout::write_csv(&run.trace, &path)?;
        let last = run.trace.last().map(|r| r.dual_obj_residual).flatten();
        let at2000 = run
            .trace
            .records
            .iter()
            .find(|r| r.k == 2000)
            .and_then(|r| r.dual_obj_residual);
        let slope = run
            .trace
            .loglog_slope(window.0, window.1, |r| r.dual_obj_residual);
        let fmt = |v: Option<f64>| v.map_or("n/a".into(), |x| format!("{x:.4e}"));
        println!(
            "{:>10} {:>9.0e} {:>14} {:>14} {:>9}",
            run.algo.name(),
            run.angle,
            fmt(last),
            fmt(at2000),
            slope.map_or("n/a".into(), |s| format!("{s:.3}")),
        );
    }
    println!("traces written to {}", args.out_dir.display());
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> Result<u8> {
    println!(
        "{:>10} {:>12} {:>8} {:>13} {:>13} {:>13}",
        "algo", "stop", "iters", "primal", "feas", "dual"
    );
    for &algo in &args.algos {
        let config = resolve_config(None, Some(algo), &args.problem, &args.solver, None)?;
        let result = runner::run(&config)?;
        let last = result.trace.last().expect("nonempty trace");
        let fmt = |v: Option<f64>| v.map_or("n/a".into(), |x| format!("{x:.4e}"));
        println!(
            "{:>10} {:>12} {:>8} {:>13} {:>13} {:>13}",
            algo.name(),
            format!("{:?}", result.outcome.stop),
            result.outcome.iterations,
            fmt(last.primal_obj_residual),
            format!("{:.4e}", last.feasibility_gap),
            fmt(last.dual_obj_residual),
        );
    }
    Ok(0)
}

fn cmd_check(args: CheckArgs) -> Result<u8> {
    let outcome = match args.kind {
        CheckKind::Schedule {
            algo,
            k_max,
            gamma1,
            norm_a,
            mu,
            l_b,
            paper_beta,
        } => checks::schedule(algo, k_max, gamma1, norm_a, mu, l_b, paper_beta)?,
        CheckKind::Bounds {
            config,
            algo,
            problem,
            solver,
        } => {
            let mut rc = resolve_config(config, algo, &problem, &solver, None)?;
            if solver.max_iters.is_none() {
                rc.max_iters = 10_000;
            }
            rc.eps = -1.0;
            checks::bounds(&rc)?
        }
        CheckKind::GapReduction {
            config,
            algo,
            problem,
            solver,
        } => {
            let mut rc = resolve_config(config, algo, &problem, &solver, None)?;
            if solver.max_iters.is_none() {
                rc.max_iters = 2_000;
            }
            rc.eps = -1.0;
            checks::gap_reduction(&rc)?
        }
    };
    println!("{}", outcome.summary);
    Ok(if outcome.ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
