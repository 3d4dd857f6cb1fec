//! `polyfv run|convergence|transient <config.json>`
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 when the experiment cannot be run.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyfv::experiment::{
    convergence_table, run_convergence, run_solve, run_transient, solve_row, ExperimentConfig, OutputOptions,
    SOLVE_HEADER,
};
use polyfv::Error;

#[derive(Parser)]
#[command(name = "polyfv", version, about = "Finite volume schemes for anisotropic diffusion on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Also write the assembled matrix in MatrixMarket format.
    #[arg(long, global = true)]
    dump_matrix: bool,
    /// Only report failures.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single solve with all diagnostics.
    Run { config: PathBuf },
    /// Convergence study over the configured levels.
    Convergence { config: PathBuf },
    /// Implicit-Euler transient run.
    Transient { config: PathBuf },
}

fn execute(cli: &Cli) -> Result<Vec<String>, Error> {
    let path = match &cli.command {
        Command::Run { config } | Command::Convergence { config } | Command::Transient { config } => config,
    };
    let config = ExperimentConfig::load(path).map_err(|e| Error::Stage { stage: "config", source: Box::new(e) })?;
    let out = OutputOptions {
        dir: Some(cli.out_dir.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."))),
        dump_matrix: cli.dump_matrix,
    };
    let (summary, failures, written) = match cli.command {
        Command::Run { .. } => {
            let o = run_solve(&config, &out)?;
            (format!("{SOLVE_HEADER}\n{}", solve_row(&o)), o.failures, o.written)
        }
        Command::Convergence { .. } => {
            let o = run_convergence(&config, &out)?;
            (convergence_table(&o.study).trim_end().to_string(), o.failures, o.written)
        }
        Command::Transient { .. } => {
            let o = run_transient(&config, &out)?;
            let summary = format!(
                "{} steps, overall [{:.6e}, {:.6e}], final [{:.6e}, {:.6e}], spd {}",
                o.steps.len(),
                o.overall_min(),
                o.overall_max(),
                o.steps.last().map_or(f64::NAN, |s| s.min),
                o.steps.last().map_or(f64::NAN, |s| s.max),
                o.spd.spd()
            );
            (summary, o.failures, o.written)
        }
    };
    if !cli.quiet {
        println!("{summary}");
        for p in written {
            println!("wrote {}", p.display());
        }
    }
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
