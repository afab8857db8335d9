use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sbs_core::benchmarks::{lookup, registry};
use sbs_core::optimizers::MethodConfig;
use sbs_harness::diag::ksd_per_snapshot;
use sbs_harness::plot::plot_trajectories;
use sbs_harness::trajectory::TrajectoryLog;
use sbs_harness::{run_experiment, write_results, ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "sbsopt", version, about = "Stein Boltzmann Sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Benchmark registry.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// One run of one method, printed as JSON.
    Single {
        #[arg(long)]
        method: String,
        #[arg(long)]
        function: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the particle trajectory (SBS family only) to this JSONL file.
        #[arg(long, value_name = "FILE", num_args = 0..=1, default_missing_value = "trajectory.jsonl")]
        log_trajectory: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        log_every: usize,
    },
    /// Render a 2-d trajectory log as SVG.
    Plot {
        log: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Diagnostics computed from a trajectory log.
    Diag {
        #[command(subcommand)]
        command: DiagCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// List the available benchmark functions.
    List,
}

#[derive(Subcommand)]
enum DiagCommand {
    /// KSD of every logged particle set.
    Ksd { log: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let table = run_experiment(&cfg)?;
            write_results(&table, &cfg)?;
            println!("{:<14} {:>10} {:>9} {:>6}", "method", "ecr", "avg_rank", "rank");
            for m in &table.methods {
                println!("{:<14} {:>10.4} {:>9.3} {:>6}", m.method, m.ecr, m.avg_rank, m.final_rank);
            }
            println!("results written to {}", cfg.output_dir.display());
        }
        Command::Bench {
            command: BenchCommand::List,
        } => {
            println!("{:<16} {:>5} {:>24} {:>22}", "name", "dims", "domain (default dim)", "f*");
            for e in registry() {
                let dom = e.domain_for(e.default_dim)?;
                let range = format!("[{}, {}]", dom.lower()[0], dom.upper()[0]);
                println!("{:<16} {:>5} {:>24} {:>22.15}", e.name, e.dims.to_string(), range, e.f_star(e.default_dim)?);
            }
        }
        Command::Single {
            method,
            function,
            dim,
            budget,
            seed,
            log_trajectory,
            log_every,
        } => {
            let entry = lookup(&function)?;
            let dim = dim.unwrap_or(entry.default_dim);
            let obj = entry.objective(dim)?;
            let mut cfg = MethodConfig::from_name(&method)?;
            if log_trajectory.is_some() {
                if log_every == 0 {
                    return Err(HarnessError::Config {
                        field: "log-every".into(),
                        reason: "must be positive".into(),
                    });
                }
                match cfg.sbs_config_mut() {
                    Some(sbs) => sbs.log_every = Some(log_every),
                    None => {
                        return Err(HarnessError::Config {
                            field: "log-trajectory".into(),
                            reason: format!("method `{method}` does not record trajectories"),
                        })
                    }
                }
            }
            let mut result = cfg.run(&obj, budget, seed)?;
            if let (Some(path), Some(traj)) = (log_trajectory, result.trajectory.take()) {
                TrajectoryLog::new(entry.name, dim, cfg.name(), seed, traj).write(&path)?;
                eprintln!("trajectory written to {}", path.display());
            }
            let report = serde_json::json!({
                "method": cfg.name(),
                "function": entry.name,
                "dim": dim,
                "seed": seed,
                "budget": budget,
                "distance": (result.best_f - entry.f_star(dim)?).abs(),
                "result": result,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::Plot { log, output } => {
            let log = TrajectoryLog::read(&log)?;
            plot_trajectories(&log, &output)?;
            println!("wrote {}", output.display());
        }
        Command::Diag {
            command: DiagCommand::Ksd { log },
        } => {
            let log = TrajectoryLog::read(&log)?;
            let rows = ksd_per_snapshot(&log)?;
            let mut out = std::io::stdout().lock();
            // a closed pipe (e.g. `| head`) ends the listing quietly
            let _ = writeln!(out, "iteration,ksd").and_then(|()| {
                rows.iter().try_for_each(|(it, k)| writeln!(out, "{it},{k:.16e}"))
            });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
