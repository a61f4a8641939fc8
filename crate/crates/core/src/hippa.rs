//! The HiPPA outer loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hope::{hope_solve_objective, ProxConfig};
use crate::oracle::{ensure_finite, ObjectiveOracle, SeedStream, Vector};
use crate::region::{project_region, RegionDescriptor};
use crate::trace::{digest, Recorder, RunTrace, Termination};

/// How `β_k` evolves; every schedule stays within `[β′, β″]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSchedule {
    Constant { beta: f64 },
    /// `β_k = min(β₀ ρ^k, cap)` with `ρ ≥ 1`.
    Geometric { beta0: f64, rho: f64, cap: f64 },
    /// Explicit values; the last one repeats.
    Sequence { values: Vec<f64> },
}

impl BetaSchedule {
    pub fn beta(&self, k: usize) -> f64 {
        match self {
            BetaSchedule::Constant { beta } => *beta,
            BetaSchedule::Geometric { beta0, rho, cap } => (beta0 * rho.powi(k.min(100_000) as i32)).min(*cap),
            BetaSchedule::Sequence { values } => values[k.min(values.len() - 1)],
        }
    }

    /// `(β′, β″)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            BetaSchedule::Constant { beta } => (*beta, *beta),
            BetaSchedule::Geometric { beta0, cap, .. } => (beta0.min(*cap), *cap),
            BetaSchedule::Sequence { values } => values
                .iter()
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &b| (lo.min(b), hi.max(b))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BetaSchedule::Sequence { values } = self {
            if values.is_empty() {
                return Err(Error::BadParameter("empty beta sequence".into()));
            }
        }
        if let BetaSchedule::Geometric { rho, .. } = self {
            if !(*rho >= 1.0) {
                return Err(Error::BadParameter(format!("rho = {rho}")));
            }
        }
        let (lo, hi) = self.bounds();
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::BadParameter(format!("beta bounds ({lo}, {hi})")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HippaConfig {
    pub prox: ProxConfig,
    pub beta_schedule: BetaSchedule,
    /// Stop once `‖x^{k+1} − x^k‖ ≤ eps_step`.
    pub eps_step: f64,
    /// Stop once `‖x^k − x̄‖ / ‖x̄‖ < eps_rel`.
    pub eps_rel: Option<f64>,
    pub max_iters: usize,
    /// Region every new iterate is projected onto.
    pub projection: Option<RegionDescriptor>,
    /// Sample size of the per-iteration objective for stochastic oracles.
    pub batch: usize,
    pub seed: u64,
}

impl HippaConfig {
    /// Constant `β`, `ε = 1e-10`, at most 1000 iterations.
    pub fn new(p: f64, beta: f64) -> Self {
        HippaConfig {
            prox: ProxConfig::new(p, beta),
            beta_schedule: BetaSchedule::Constant { beta },
            eps_step: 1e-10,
            eps_rel: None,
            max_iters: 1000,
            projection: None,
            batch: 12_000,
            seed: 0,
        }
    }

    pub fn p(&self) -> f64 {
        self.prox.p
    }

    pub fn validate(&self) -> Result<()> {
        self.prox.validate()?;
        self.beta_schedule.validate()?;
        if !(self.eps_step > 0.0) {
            return Err(Error::BadParameter(format!("eps_step = {}", self.eps_step)));
        }
        if let Some(r) = &self.projection {
            r.validate()?;
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        digest(serde_json::to_string(self).expect("configs serialize").as_bytes())
    }
}

/// Runs HiPPA from `x0`.
///
/// Record `k` holds `x^k` and the length of the step leaving it. A run that
/// stops on the relative error or the iteration cap ends with a record whose
/// step norm is 0 because no step was taken from it.
pub fn run_hippa(oracle: &ObjectiveOracle, x0: &Vector, cfg: &HippaConfig) -> Result<RunTrace> {
    ensure_finite(x0)?;
    cfg.validate()?;
    if x0.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: x0.len(),
        });
    }
    let rec = Recorder::new(oracle);
    let stream = SeedStream::new(cfg.seed);
    let mut records = Vec::new();
    let mut x = x0.clone();
    let mut k = 0;
    let terminated_by = loop {
        if let (Some(tol), Some(e)) = (cfg.eps_rel, rec.rel_err(&x)) {
            if e < tol {
                records.push(rec.record(k, &x, 0.0, (0, true)));
                break Termination::RelErrTol;
            }
        }
        if k >= cfg.max_iters {
            records.push(rec.record(k, &x, 0.0, (0, true)));
            break Termination::MaxIters;
        }
        let mut prox = cfg.prox.clone();
        prox.beta = cfg.beta_schedule.beta(k);
        let h = oracle.sampled(stream.at(k as u64 + 1), cfg.batch);
        let r = hope_solve_objective(h.as_ref(), &x, &prox)?;
        let mut y = r.y;
        if let Some(region) = &cfg.projection {
            y = project_region(&y, region)?;
        }
        let step = (&y - &x).norm();
        records.push(rec.record(k, &x, step, (r.inner_iters, r.converged)));
        if step <= cfg.eps_step {
            break Termination::StepTol;
        }
        x = y;
        k += 1;
    };
    Ok(RunTrace {
        records,
        config_digest: cfg.digest(),
        terminated_by,
        min_value: oracle.min_value(),
        inner_tol: cfg.prox.inner_tol,
    })
}

/// `⌈p β″ (h(x⁰) − h*) / ε^p⌉`, an upper bound on the first `k` with a step of at most `ε`.
pub fn iteration_bound(p: f64, beta_pp: f64, h0: f64, h_star: f64, eps: f64) -> Result<u64> {
    if !(p > 1.0) || !(beta_pp > 0.0) || !(eps > 0.0) || !(h0 >= h_star) {
        return Err(Error::BadParameter(format!(
            "p={p}, beta''={beta_pp}, h0={h0}, h*={h_star}, eps={eps}"
        )));
    }
    let v = p * beta_pp * (h0 - h_star) / eps.powf(p);
    // Guard against 200.00000000000003 style round-up of exact integers.
    let r = v.round();
    Ok(if (v - r).abs() <= 1e-9 * r.max(1.0) { r } else { v.ceil() } as u64)
}
