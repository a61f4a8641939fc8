//! Runs every (method, seed) pair of an experiment and writes the artifacts.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use hippa_core::rates::max_local_radius;
use hippa_core::{
    check_rate_bounds, estimate_rate, project_region, run_baseline, run_hippa, FittedRates, RateOptions,
    RateReport, RunTrace, Vector, ZooEntry,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Solver};
use crate::CliError;

pub const SUMMARY_HEADER: [&str; 5] = ["method", "iteration_to_stop", "time_s", "relative_error", "objective_value"];

/// One row of the summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub iteration_to_stop: usize,
    pub time_s: f64,
    /// `‖x − x̄‖ / ‖x̄‖` at the last iterate; absent when `x̄ = 0` or unknown.
    pub relative_error: Option<f64>,
    pub objective_value: f64,
}

impl SummaryRow {
    fn new(method: String, t: &RunTrace) -> Self {
        let last = t.last();
        SummaryRow {
            method,
            iteration_to_stop: last.k,
            time_s: last.elapsed_s,
            relative_error: last.rel_err,
            objective_value: last.value,
        }
    }
}

/// The per-method JSON: fitted constants for every method, theorem checks
/// for HiPPA on entries with a deterministic oracle and a certificate.
#[derive(Clone, Debug, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub seed: u64,
    pub terminated_by: hippa_core::Termination,
    pub fitted: Option<FittedRates>,
    pub rates: Option<RateReport>,
    pub note: Option<String>,
}

struct Job<'a> {
    label: String,
    method: usize,
    seed: u64,
    solver: Solver,
    entry: &'a ZooEntry,
    x0: &'a Vector,
}

fn csv_name(label: &str, seed: u64) -> String {
    format!("{label}_seed{seed}.csv")
}

fn report(job: &Job, t: &RunTrace) -> MethodReport {
    let fitted = estimate_rate(t).ok();
    let mut out = MethodReport {
        method: job.label.clone(),
        seed: job.seed,
        terminated_by: t.terminated_by,
        fitted,
        rates: None,
        note: None,
    };
    let (Solver::Hippa(cfg), Some(cert)) = (&job.solver, &job.entry.certificate) else {
        out.note = Some("no theorem checks for this method".into());
        return out;
    };
    if job.entry.oracle.is_stochastic() {
        out.note = Some("stochastic oracle; rates are fitted only".into());
        return out;
    }
    let p = cfg.p();
    let radius = if p < 2.0 && cert.gamma > 0.0 { max_local_radius(p).ok() } else { None };
    match check_rate_bounds(t, cert, cfg, &RateOptions { radius, ..Default::default() }) {
        Ok(r) => out.rates = Some(r),
        Err(e) => out.note = Some(e.to_string()),
    }
    out
}

fn run_job(job: &Job, cfg: &ExperimentConfig) -> Result<RunTrace, CliError> {
    let region = cfg
        .project_to_region
        .then(|| job.entry.certificate.as_ref().map(|c| c.region.clone()))
        .flatten();
    let t = match &job.solver {
        Solver::Hippa(c) => {
            let mut c = c.clone();
            c.projection = region;
            run_hippa(&job.entry.oracle, job.x0, &c)?
        }
        Solver::Baseline(c) => {
            let mut c = c.clone();
            c.region = region;
            run_baseline(&job.entry.oracle, job.x0, &c)?
        }
    };
    Ok(t)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(BufWriter::new(f), v).map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.iteration_to_stop.to_string(),
            format!("{:e}", r.time_s),
            r.relative_error.map(|v| format!("{v:e}")).unwrap_or_default(),
            format!("{:e}", r.objective_value),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Runs the experiment and returns the paths written: one CSV per
/// (method, seed), one report per method, and `summary.csv` last.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let entry = cfg.entry()?;
    let x0 = match &cfg.x0 {
        Some(v) => Vector::from_column_slice(v),
        None => entry.default_start.clone(),
    };
    let x0 = match (cfg.project_to_region, &entry.certificate) {
        (true, Some(c)) => project_region(&x0, &c.region)?,
        _ => x0,
    };
    let dir = cfg.resolved_output();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;

    let multi_seed = cfg.seeds.len() > 1;
    let jobs: Vec<Job> = cfg
        .methods
        .iter()
        .enumerate()
        .flat_map(|(i, m)| {
            let (entry, x0) = (&entry, &x0);
            cfg.seeds.iter().map(move |&seed| Job {
                label: m.label(),
                method: i,
                seed,
                solver: m.solver(&cfg.stopping, seed),
                entry,
                x0,
            })
        })
        .collect();

    let results: Vec<(PathBuf, SummaryRow, Option<MethodReport>)> = jobs
        .par_iter()
        .map(|job| {
            let t = run_job(job, cfg)?;
            let path = dir.join(csv_name(&job.label, job.seed));
            let f = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            t.write_csv(BufWriter::new(f))?;
            let name = if multi_seed { format!("{}@{}", job.label, job.seed) } else { job.label.clone() };
            // The first seed stands for the method in its report.
            let rep = (job.seed == cfg.seeds[0]).then(|| report(job, &t));
            Ok((path, SummaryRow::new(name, &t), rep))
        })
        .collect::<Result<_, CliError>>()?;

    let mut paths = Vec::new();
    let mut rows = Vec::new();
    for (job, (path, row, rep)) in jobs.iter().zip(results) {
        paths.push(path);
        rows.push(row);
        if let Some(rep) = rep {
            let p = dir.join(format!("{}_rates.json", cfg.methods[job.method].label()));
            write_json(&p, &rep)?;
            paths.push(p);
        }
    }
    let summary = dir.join("summary.csv");
    write_summary(&summary, &rows)?;
    paths.push(summary);
    Ok(paths)
}
