//! Run execution: seeded (method, seed) jobs, optional sweep cells, a
//! bounded worker pool, and the output files.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use fracdim_core::bounds::standard_report;
use fracdim_core::optim::{run_optimizer, Method, RunTrace};

use crate::config::ExperimentConfig;
use crate::trace_io::{fmt_f64, trace_to_csv, write_atomic, RunSummary};
use crate::{CliError, OutputFormat};

pub struct RunOutcome {
    pub method: Method,
    pub seed: u64,
    pub final_abs_errors: Option<Vec<f64>>,
    pub csv_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub bounds_all_hold: bool,
}

fn execute_trace(cfg: &ExperimentConfig, method: Method, seed: u64) -> Result<RunTrace<f64>, CliError> {
    let problem = cfg.build_problem(seed).map_err(CliError::Config)?;
    run_optimizer(problem, method, &cfg.optimizer_config(), cfg.t_max, seed)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run_one(
    cfg: &ExperimentConfig,
    method: Method,
    seed: u64,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<RunOutcome, CliError> {
    let trace = execute_trace(cfg, method, seed)?;
    let report = standard_report(&trace);
    let bounds_all_hold = report.all_hold();

    let stem = format!("{}_seed{}", method.name(), seed);
    let mut csv_path = None;
    let mut summary_path = None;
    if format.writes_csv() {
        let path = out_dir.join(format!("{stem}.csv"));
        write_atomic(&path, trace_to_csv(&trace).as_bytes()).map_err(CliError::Io)?;
        csv_path = Some(path);
    }
    if format.writes_json() {
        let summary = RunSummary::from_trace(&trace, report, cfg.echo());
        let mut text = serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Config(format!("summary serialization failed: {e}")))?;
        text.push('\n');
        let path = out_dir.join(format!("{stem}.json"));
        write_atomic(&path, text.as_bytes()).map_err(CliError::Io)?;
        summary_path = Some(path);
    }

    let final_abs_errors = trace
        .final_abs_errors()
        .map(|layers| layers.into_iter().flatten().collect());
    Ok(RunOutcome {
        method,
        seed,
        final_abs_errors,
        csv_path,
        summary_path,
        bounds_all_hold,
    })
}

/// Runs every (method, seed) pair of the config, writing one trace file
/// and one summary per run. Jobs execute on up to `workers` threads;
/// outputs are per-run files so the schedule cannot affect the bytes.
pub fn run_all(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    format: OutputFormat,
    workers: usize,
) -> Result<Vec<RunOutcome>, CliError> {
    let jobs: Vec<(Method, u64)> = cfg
        .methods
        .iter()
        .flat_map(|&m| cfg.seeds.iter().map(move |&s| (m, s)))
        .collect();
    run_jobs(&jobs, workers, |&(method, seed)| {
        run_one(cfg, method, seed, out_dir, format)
    })
}

fn run_jobs<J, R, F>(jobs: &[J], workers: usize, f: F) -> Result<Vec<R>, CliError>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> Result<R, CliError> + Sync,
{
    let workers = workers.max(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<R, CliError>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= jobs.len() {
                    break;
                }
                let out = f(&jobs[idx]);
                results.lock().expect("worker poisoned").push((idx, out));
            });
        }
    });
    let mut results = results.into_inner().expect("worker poisoned");
    results.sort_by_key(|(idx, _)| *idx);
    results.into_iter().map(|(_, r)| r).collect()
}

/// One aggregate row of a sweep: per-cell mean and sample standard
/// deviation of the final absolute errors over seeds.
pub struct SweepRow {
    pub value: String,
    pub method: Method,
    pub n_seeds: usize,
    pub err_mean: Vec<f64>,
    pub err_std: Vec<f64>,
}

/// Cartesian product of sweep values × methods × seeds; returns the
/// aggregate table rows in deterministic (value, method) order.
pub fn run_sweep(
    base: &ExperimentConfig,
    param: &str,
    values: &[String],
    workers: usize,
) -> Result<Vec<SweepRow>, CliError> {
    // validate the parameter name against a scratch copy first
    let mut probe = base.clone();
    probe
        .apply(param, values.first().map(String::as_str).unwrap_or(""))
        .map_err(CliError::Config)?;

    let mut cells = Vec::new();
    for value in values {
        let mut cfg = base.clone();
        cfg.apply(param, value).map_err(CliError::Config)?;
        cfg.validate().map_err(CliError::Config)?;
        for &method in &cfg.methods {
            cells.push((cfg.clone(), method, value.clone()));
        }
    }

    let outcomes = run_jobs(&cells, workers, |(cfg, method, value)| {
        let mut per_seed: Vec<Vec<f64>> = Vec::with_capacity(cfg.seeds.len());
        for &seed in &cfg.seeds {
            let trace = execute_trace(cfg, *method, seed)?;
            let errs: Vec<f64> = trace
                .final_abs_errors()
                .map(|layers| layers.into_iter().flatten().collect())
                .unwrap_or_default();
            per_seed.push(errs);
        }
        let dim = per_seed.first().map(Vec::len).unwrap_or(0);
        let n = per_seed.len();
        let mut err_mean = vec![0.0; dim];
        let mut err_std = vec![0.0; dim];
        for i in 0..dim {
            let mean = per_seed.iter().map(|e| e[i]).sum::<f64>() / n as f64;
            err_mean[i] = mean;
            if n > 1 {
                let var = per_seed
                    .iter()
                    .map(|e| (e[i] - mean) * (e[i] - mean))
                    .sum::<f64>()
                    / (n - 1) as f64;
                err_std[i] = var.sqrt();
            }
        }
        Ok(SweepRow {
            value: value.clone(),
            method: *method,
            n_seeds: n,
            err_mean,
            err_std,
        })
    })?;
    Ok(outcomes)
}

pub fn sweep_table(param: &str, rows: &[SweepRow]) -> String {
    let dim = rows.iter().map(|r| r.err_mean.len()).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str("param,value,method,n_seeds");
    for i in 0..dim {
        out.push_str(&format!(",err{i}_mean,err{i}_std"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{param},{},{},{}",
            row.value,
            row.method.name(),
            row.n_seeds
        ));
        for i in 0..dim {
            out.push(',');
            out.push_str(&fmt_f64(row.err_mean[i]));
            out.push(',');
            out.push_str(&fmt_f64(row.err_std[i]));
        }
        out.push('\n');
    }
    out
}
