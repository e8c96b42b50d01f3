use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dqplate::JacobianStrategy;
use dqplate_cli::{run_bench, run_case, run_convergence, run_sweep, CaseFile, CliError, Overrides};

/// Nonlinear bending of rectangular plates by differential quadrature.
#[derive(Debug, Parser)]
#[command(name = "dqplate", version)]
struct Cli {
    /// Residual tolerance (max-norm) for Newton's method.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Maximum Newton iterations per solve.
    #[arg(long, global = true)]
    max_iter: Option<usize>,

    /// Jacobian construction.
    #[arg(long, global = true, value_enum)]
    jacobian: Option<JacobianArg>,

    /// Directory for CSV output.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum JacobianArg {
    Sjt,
    Fd,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one case; writes solution.csv and summary.csv.
    Solve { case: PathBuf },
    /// Solve the case's load sweep with warm starts; writes sweep.csv.
    Sweep { case: PathBuf },
    /// Time Jacobian assembly and solves for both strategies; writes bench.csv.
    Bench { case: PathBuf },
    /// Grid-convergence study; writes convergence.csv and, if configured,
    /// linear_comparison.csv.
    Converge { case: PathBuf },
}

fn configure_threads() {
    let Ok(value) = std::env::var("DQPLATE_THREADS") else {
        return;
    };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
        _ => log::warn!("ignoring DQPLATE_THREADS={value:?}: expected a positive integer"),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        tol: cli.tol,
        max_iter: cli.max_iter,
        jacobian: cli.jacobian.map(|j| match j {
            JacobianArg::Sjt => JacobianStrategy::SjtAnalytic,
            JacobianArg::Fd => JacobianStrategy::FiniteDifference,
        }),
    };
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Output(format!("{}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Solve { case } => {
            let s = run_case(&CaseFile::load(case)?, &overrides, out)?;
            println!(
                "center w/h = {:.6}  iterations = {}  max|phi| = {:.3e}  time = {:.2} ms",
                s.center_w_over_h, s.iterations, s.final_residual, s.wall_time_ms
            );
        }
        Command::Sweep { case } => {
            let table = run_sweep(&CaseFile::load(case)?, &overrides, out)?;
            for r in &table.rows {
                println!("q = {:<12} w/h = {:.6}  iterations = {}", r.q, r.center_deflection_ratio, r.iterations);
            }
        }
        Command::Bench { case } => {
            let report = run_bench(&CaseFile::load(case)?, &overrides, out)?;
            for r in &report.rows {
                println!(
                    "n = {:>2}  {:<3}  jacobian {:>9.3} ms  solve {:>9.3} ms  iterations {}",
                    r.n, r.strategy, r.jac_ms, r.solve_ms, r.iterations
                );
            }
            println!("max relative gap between strategies: {:.2e}", report.max_strategy_gap);
        }
        Command::Converge { case } => {
            let report = run_convergence(&CaseFile::load(case)?, &overrides, out)?;
            for r in &report.rows {
                let err = r.abs_error.map_or(String::new(), |e| format!("  |error| = {e:.3e}"));
                println!("q = {:<12} {:<9} {:>2}x{:<2} w/h = {:.6}{err}", r.q, r.kind, r.n, r.n, r.center_w_over_h);
            }
            for r in &report.linear {
                println!(
                    "linear {:<5} n = {}  coefficient {:.7}  series {:.7}  |error| = {:.3e}",
                    r.scheme, r.n, r.center_coefficient, r.series_coefficient, r.abs_error
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
