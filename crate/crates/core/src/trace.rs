//! Per-iteration run records and their CSV form.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::oracle::{ObjectiveOracle, Vector};

/// One iterate of a run. `step_norm` is the length of the step that leaves `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Vector,
    pub value: f64,
    /// Standard error of `value` when it is a Monte-Carlo estimate.
    pub value_se: Option<f64>,
    pub step_norm: f64,
    pub dist_to_min: Option<f64>,
    pub rel_err: Option<f64>,
    pub inner_iters: usize,
    pub inner_converged: bool,
    pub elapsed_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepTol,
    RelErrTol,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub config_digest: String,
    pub terminated_by: Termination,
    /// Known minimal value of the objective, if any.
    pub min_value: Option<f64>,
    /// Inner-solver tolerance used for each step (0 for explicit methods).
    pub inner_tol: f64,
}

impl RunTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("traces are nonempty")
    }

    /// Index of the terminal iterate.
    pub fn iterations(&self) -> usize {
        self.last().k
    }

    /// Whether some inner solve hit its budget.
    pub fn inner_budget_exhausted(&self) -> bool {
        self.records.iter().any(|r| !r.inner_converged)
    }

    pub fn value_gaps(&self) -> Option<Vec<f64>> {
        let h = self.min_value?;
        Some(self.records.iter().map(|r| r.value - h).collect())
    }

    pub fn distances(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.dist_to_min).collect()
    }

    /// Writes the fixed CSV columns; absent values become empty fields.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.records {
            out.write_record([
                r.k.to_string(),
                fmt_f64(r.value),
                fmt_f64(r.step_norm),
                r.dist_to_min.map(fmt_f64).unwrap_or_default(),
                r.rel_err.map(fmt_f64).unwrap_or_default(),
                r.inner_iters.to_string(),
                fmt_f64(r.elapsed_s),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a trace written by [`RunTrace::write_csv`]. Iterates are not
    /// stored in the CSV, so every `x` comes back empty.
    pub fn read_csv<R: Read>(r: R, min_value: Option<f64>) -> Result<RunTrace> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let num = |i: usize| -> Result<Option<f64>> {
                let s = row.get(i).unwrap_or("").trim();
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|e| Error::Parse(format!("{s}: {e}")))
                }
            };
            let int = |i: usize| -> Result<usize> {
                let s = row.get(i).unwrap_or("").trim();
                s.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("{s}: {e}")))
            };
            records.push(TraceRecord {
                k: int(0)?,
                x: Vector::zeros(0),
                value: num(1)?.ok_or_else(|| Error::Parse("missing value".into()))?,
                value_se: None,
                step_norm: num(2)?.unwrap_or(0.0),
                dist_to_min: num(3)?,
                rel_err: num(4)?,
                inner_iters: int(5)?,
                inner_converged: true,
                elapsed_s: num(6)?.unwrap_or(0.0),
            });
        }
        if records.is_empty() {
            return Err(Error::InsufficientTrace("empty CSV".into()));
        }
        Ok(RunTrace {
            records,
            config_digest: String::new(),
            terminated_by: Termination::MaxIters,
            min_value,
            inner_tol: 0.0,
        })
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "k",
    "value",
    "step_norm",
    "dist_to_min",
    "rel_err",
    "inner_iters",
    "elapsed_s",
];

/// Builds records for a run against a fixed oracle and start time.
pub(crate) struct Recorder<'a> {
    oracle: &'a ObjectiveOracle,
    start: Instant,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(oracle: &'a ObjectiveOracle) -> Self {
        Recorder { oracle, start: Instant::now() }
    }

    /// `‖x − x̄‖ / ‖x̄‖`, when the minimizer is known and nonzero.
    pub(crate) fn rel_err(&self, x: &Vector) -> Option<f64> {
        let m = self.oracle.minimizer()?;
        let n = m.norm();
        (n > 0.0).then(|| (x - m).norm() / n)
    }

    pub(crate) fn record(&self, k: usize, x: &Vector, step: f64, inner: (usize, bool)) -> TraceRecord {
        let est = self.oracle.estimate(x);
        TraceRecord {
            k,
            x: x.clone(),
            value: est.mean,
            value_se: self.oracle.is_stochastic().then_some(est.std_err),
            step_norm: step,
            dist_to_min: self.oracle.minimizer().map(|m| (x - m).norm()),
            rel_err: self.rel_err(x),
            inner_iters: inner.0,
            inner_converged: inner.1,
            elapsed_s: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// Hex SHA-256 of the given bytes.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Per record: `(k, ‖x^k − x̄‖, h(x^k) − h*)`.
pub fn distance_metrics(trace: &RunTrace, oracle: &ObjectiveOracle) -> Result<Vec<(usize, f64, f64)>> {
    let (xbar, hstar) = match (oracle.minimizer(), oracle.min_value()) {
        (Some(x), Some(h)) => (x, h),
        _ => return Err(Error::MissingMinimizer),
    };
    trace
        .records
        .iter()
        .map(|r| {
            if r.x.len() != xbar.len() {
                return Err(Error::DimensionMismatch {
                    expected: xbar.len(),
                    got: r.x.len(),
                });
            }
            Ok((r.k, (&r.x - xbar).norm(), r.value - hstar))
        })
        .collect()
}
