use std::path::PathBuf;
use std::process::ExitCode;

use aprid_bench::config::ExperimentConfig;
use aprid_bench::{compare_report, parse_seed_list, run_experiment, sweep, BenchError};
use clap::{Parser, Subcommand};

/// Adaptive primal-dual stochastic gradient experiments.
#[derive(Parser)]
#[command(name = "aprid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, seed) cell of a config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds or ranges, e.g. `1,2,5-8`.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize finished run directories.
    Report {
        #[arg(long = "in", num_args = 1.., required = true)]
        dirs: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-run a config for several values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted key, e.g. `solver.theta` or `steps.rho`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An unreadable config file is a config error, not an I/O failure.
fn config_error(e: BenchError) -> BenchError {
    match e {
        BenchError::Io { .. } => BenchError::Config(vec![e.to_string()]),
        other => other,
    }
}

fn execute(cli: Cli) -> Result<ExitCode, BenchError> {
    match cli.command {
        Command::Run { config, seeds, out } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(config_error)?;
            if let Some(s) = seeds {
                cfg.run.seeds = parse_seed_list(&s)?;
            }
            if let Some(o) = out {
                cfg.run.output = o;
            }
            let summary = run_experiment(&cfg)?;
            println!(
                "{} runs written to {} ({:.2} s)",
                summary.cells.len(),
                summary.output.display(),
                summary.total_wall_seconds
            );
            let diverged = summary.diverged();
            if diverged > 0 {
                return Err(BenchError::Divergence {
                    failed: diverged,
                    total: summary.cells.len(),
                });
            }
            if summary.failed() > 0 {
                eprintln!("{} run(s) failed; see the manifest", summary.failed());
                return Ok(ExitCode::from(1));
            }
            let report = compare_report(&[summary.output])?;
            print!("{}", report.to_text());
        }
        Command::Report { dirs, csv } => {
            let report = compare_report(&dirs)?;
            print!("{}", report.to_text());
            if let Some(p) = csv {
                std::fs::write(&p, report.to_csv()).map_err(|e| BenchError::io(&p, e))?;
            }
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            out,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| config_error(BenchError::io(&config, e)))?;
            let table: toml::Table = text.parse().map_err(|e: toml::de::Error| BenchError::config(e.to_string()))?;
            let seeds = seeds.map(|s| parse_seed_list(&s)).transpose()?;
            let out = match out {
                Some(o) => o,
                None => ExperimentConfig::from_table(table.clone(), config.parent())?.run.output,
            };
            let (summaries, report) = sweep(&table, config.parent(), &param, &values, seeds.as_deref(), &out)?;
            print!("{}", report.to_text());
            let diverged: usize = summaries.iter().map(|s| s.diverged()).sum();
            if diverged > 0 {
                return Err(BenchError::Divergence {
                    failed: diverged,
                    total: summaries.iter().map(|s| s.cells.len()).sum(),
                });
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
