//! Running an experiment grid and writing its results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sbs_core::benchmarks::{distance_to_minimum, lookup};
use sbs_core::optimizers::{MethodConfig, Trajectory};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::metrics;
use crate::seed::run_seed;
use crate::trajectory::TrajectoryLog;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "SBSOPT_THREADS";

/// Outcome of one (method, function, repetition) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub method: String,
    pub function: String,
    pub dim: usize,
    pub repetition: usize,
    pub seed: u64,
    pub best_f: f64,
    pub distance: f64,
    pub evals_used: u64,
    pub iterations_done: usize,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

/// Statistics of one method on one function over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub method: String,
    pub function: String,
    pub dim: usize,
    pub mean_distance: f64,
    pub std_distance: f64,
    pub mean_evals: f64,
    pub max_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub ecr: f64,
    pub avg_rank: f64,
    pub final_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub budget: u64,
    /// Method-major, in config order.
    pub cells: Vec<Cell>,
    pub methods: Vec<MethodSummary>,
    /// Every run, ordered by method, function and repetition.
    pub runs: Vec<RunRecord>,
}

impl ExperimentTable {
    pub fn cell(&self, method: &str, function: &str, dim: usize) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.function.eq_ignore_ascii_case(function) && c.dim == dim)
    }

    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| HarnessError::config(THREADS_ENV, format!("`{v}` is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| HarnessError::config(THREADS_ENV, e.to_string()))
}

struct Job {
    method: usize,
    function: usize,
    repetition: usize,
}

/// Runs every (method, function, repetition) cell and aggregates the table.
/// Runs execute in parallel; results are collected in job order, so the
/// table does not depend on scheduling or on the pool size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    let functions: Vec<(&'static str, usize)> = cfg
        .functions
        .iter()
        .map(|f| Ok((lookup(&f.name)?.name, f.dim)))
        .collect::<Result<_>>()?;
    let methods: Vec<MethodConfig> = cfg
        .methods
        .iter()
        .map(|m| {
            let mut m = m.clone();
            if cfg.log_trajectory {
                if let Some(sbs) = m.sbs_config_mut() {
                    sbs.log_every = Some(cfg.log_every);
                }
            }
            m
        })
        .collect();
    let mut jobs = Vec::new();
    for method in 0..methods.len() {
        for function in 0..functions.len() {
            for repetition in 0..cfg.repetitions {
                jobs.push(Job {
                    method,
                    function,
                    repetition,
                });
            }
        }
    }

    let run_one = |job: &Job| -> Result<RunRecord> {
        let method = &methods[job.method];
        let (name, dim) = functions[job.function];
        let entry = lookup(name)?;
        let obj = entry.objective(dim)?;
        let seed = run_seed(cfg.base_seed, method.name(), name, dim, job.repetition);
        let result = method.run(&obj, cfg.budget, seed)?;
        if result.evals_used > cfg.budget {
            return Err(HarnessError::BudgetExceeded {
                method: method.name().to_string(),
                function: name.to_string(),
                dim,
                used: result.evals_used,
                budget: cfg.budget,
            });
        }
        Ok(RunRecord {
            method: method.name().to_string(),
            function: name.to_string(),
            dim,
            repetition: job.repetition,
            seed,
            best_f: result.best_f,
            distance: distance_to_minimum(entry.f_star(dim)?, result.best_f),
            evals_used: result.evals_used,
            iterations_done: result.iterations_done,
            trajectory: result.trajectory,
        })
    };
    let runs: Vec<RunRecord> = thread_pool()?.install(|| jobs.par_iter().map(run_one).collect::<Result<_>>())?;

    let mut cells = Vec::new();
    let mut table = vec![vec![0.0; functions.len()]; methods.len()];
    for (m, method) in methods.iter().enumerate() {
        for (f, &(name, dim)) in functions.iter().enumerate() {
            let start = (m * functions.len() + f) * cfg.repetitions;
            let group = &runs[start..start + cfg.repetitions];
            let distances: Vec<f64> = group.iter().map(|r| r.distance).collect();
            let evals: Vec<f64> = group.iter().map(|r| r.evals_used as f64).collect();
            let cell = Cell {
                method: method.name().to_string(),
                function: name.to_string(),
                dim,
                mean_distance: metrics::mean(&distances),
                std_distance: metrics::sample_std(&distances),
                mean_evals: metrics::mean(&evals),
                max_evals: group.iter().map(|r| r.evals_used).max().unwrap_or(0),
            };
            table[m][f] = cell.mean_distance;
            cells.push(cell);
        }
    }
    let ecr = metrics::ecr(&table);
    let avg = metrics::average_rank(&table);
    let fin = metrics::final_rank(&avg);
    let summaries = methods
        .iter()
        .enumerate()
        .map(|(m, method)| MethodSummary {
            method: method.name().to_string(),
            ecr: ecr[m],
            avg_rank: avg[m],
            final_rank: fin[m],
        })
        .collect();
    Ok(ExperimentTable {
        budget: cfg.budget,
        cells,
        methods: summaries,
        runs,
    })
}

/// `results.csv` contents. Reals are written with 17 significant digits.
pub fn results_csv(table: &ExperimentTable) -> String {
    let mut out = String::from("method,function,dim,mean_distance,std_distance,mean_evals,budget\n");
    for c in &table.cells {
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e},{}",
            c.method, c.function, c.dim, c.mean_distance, c.std_distance, c.mean_evals, table.budget
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'static str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    table: &'a ExperimentTable,
}

pub fn summary_json(table: &ExperimentTable, cfg: &ExperimentConfig) -> String {
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        table,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}

/// File name of a run's trajectory log.
pub fn trajectory_file_name(run: &RunRecord) -> String {
    format!("{}__{}-{}d__rep{}.jsonl", run.method, run.function, run.dim, run.repetition)
}

/// Writes `results.csv`, `summary.json` and, for runs that carry one, a
/// trajectory log under `trajectories/`. Returns the paths written.
pub fn write_results(table: &ExperimentTable, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let write = |path: PathBuf, text: &str| -> Result<PathBuf> {
        std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
        Ok(path)
    };
    let mut written = vec![
        write(dir.join("results.csv"), &results_csv(table))?,
        write(dir.join("summary.json"), &summary_json(table, cfg))?,
    ];
    let logged: Vec<&RunRecord> = table.runs.iter().filter(|r| r.trajectory.is_some()).collect();
    if !logged.is_empty() {
        let tdir: &Path = &dir.join("trajectories");
        std::fs::create_dir_all(tdir).map_err(|e| HarnessError::io(tdir, e))?;
        for run in logged {
            let log = TrajectoryLog::new(
                &run.function,
                run.dim,
                &run.method,
                run.seed,
                run.trajectory.clone().expect("filtered on presence"),
            );
            let path = tdir.join(trajectory_file_name(run));
            log.write(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}
