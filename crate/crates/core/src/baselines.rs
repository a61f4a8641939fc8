//! Projected gradient and subgradient baselines.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{ensure_finite, Objective, ObjectiveOracle, SeedStream, Vector};
use crate::trace::{digest, Recorder, RunTrace, Termination};

pub use crate::region::project_region;
use crate::region::RegionDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Projected gradient descent.
    Pgd,
    /// Projected stochastic gradient descent.
    Psgd,
    /// Projected subgradient method.
    Psg,
    /// Projected stochastic subgradient method.
    Pssg,
}

impl Method {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Psgd | Method::Pssg)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Pgd => "pgd",
            Method::Psgd => "psgd",
            Method::Psg => "psg",
            Method::Pssg => "pssg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Constant,
    /// `α_k = α₀ / √k` with `k` counted from 1.
    InvSqrtK,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: Method,
    pub step0: f64,
    pub step_rule: StepRule,
    /// Sample size per step: Monte-Carlo draws for stochastic oracles, data
    /// terms for the minibatch methods on finite sums.
    pub batch: usize,
    pub max_iters: usize,
    pub rel_err_tol: Option<f64>,
    pub region: Option<RegionDescriptor>,
    pub seed: u64,
}

impl BaselineConfig {
    /// The defaults for `method`: constant 0.12 for PGD, constant 0.07 with
    /// batches of 256 for PSGD, `0.8/√k` for PSG, and `0.8/√k` with batches of
    /// 32 for PSSG.
    pub fn new(method: Method) -> Self {
        let (step0, step_rule, batch) = match method {
            Method::Pgd => (0.12, StepRule::Constant, 12_000),
            Method::Psgd => (0.07, StepRule::Constant, 256),
            Method::Psg => (0.8, StepRule::InvSqrtK, 0),
            Method::Pssg => (0.8, StepRule::InvSqrtK, 32),
        };
        BaselineConfig {
            method,
            step0,
            step_rule,
            batch,
            max_iters: 2000,
            rel_err_tol: None,
            region: None,
            seed: 0,
        }
    }

    /// Step used when leaving iterate `k` (counted from 0).
    pub fn step(&self, k: usize) -> f64 {
        match self.step_rule {
            StepRule::Constant => self.step0,
            StepRule::InvSqrtK => self.step0 / ((k + 1) as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return Err(Error::BadParameter(format!("step0 = {}", self.step0)));
        }
        if self.method.is_stochastic() && self.batch == 0 {
            return Err(Error::BadParameter("batch = 0".into()));
        }
        if let Some(r) = &self.region {
            r.validate()?;
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        digest(serde_json::to_string(self).expect("configs serialize").as_bytes())
    }
}

/// The objective whose (sub)gradient drives step `k`.
fn step_objective(oracle: &ObjectiveOracle, cfg: &BaselineConfig, stream: SeedStream) -> Result<Arc<dyn Objective>> {
    if oracle.is_stochastic() {
        let batch = if cfg.batch == 0 { 1 } else { cfg.batch };
        return Ok(oracle.sampled(stream, batch));
    }
    if cfg.method.is_stochastic() {
        return oracle
            .objective()
            .minibatch(stream, cfg.batch)
            .ok_or_else(|| Error::BadParameter(format!("{} needs a stochastic or finite-sum objective", cfg.method.name())));
    }
    Ok(oracle.objective().clone())
}

/// Runs `x^{k+1} = Π(x^k − α_k g^k)` from the projection of `x0`.
///
/// Step `k` draws its samples from offset `k + 1` of the run's seed. The run
/// stops on the relative error, the iteration cap, or a zero step.
pub fn run_baseline(oracle: &ObjectiveOracle, x0: &Vector, cfg: &BaselineConfig) -> Result<RunTrace> {
    ensure_finite(x0)?;
    cfg.validate()?;
    if x0.len() != oracle.dim() {
        return Err(Error::DimensionMismatch { expected: oracle.dim(), got: x0.len() });
    }
    if !oracle.has_subgradient() {
        return Err(Error::MissingSubgradient);
    }
    let project = |x: &Vector| match &cfg.region {
        Some(r) => project_region(x, r),
        None => Ok(x.clone()),
    };
    let rec = Recorder::new(oracle);
    let stream = SeedStream::new(cfg.seed);
    let mut records = Vec::new();
    let mut x = project(x0)?;
    let mut k = 0;
    let terminated_by = loop {
        if let (Some(tol), Some(e)) = (cfg.rel_err_tol, rec.rel_err(&x)) {
            if e < tol {
                records.push(rec.record(k, &x, 0.0, (0, true)));
                break Termination::RelErrTol;
            }
        }
        if k >= cfg.max_iters {
            records.push(rec.record(k, &x, 0.0, (0, true)));
            break Termination::MaxIters;
        }
        let h = step_objective(oracle, cfg, stream.at(k as u64 + 1))?;
        let g = h.subgradient(&x).ok_or(Error::MissingSubgradient)?;
        let y = project(&(&x - g * cfg.step(k)))?;
        ensure_finite(&y).map_err(|_| Error::NonFiniteObjective)?;
        let step = (&y - &x).norm();
        records.push(rec.record(k, &x, step, (0, true)));
        if step == 0.0 {
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
        inner_tol: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::make_square;

    #[test]
    fn pgd_on_quadratic_halves() {
        let e = make_square(2).unwrap();
        let x0 = Vector::from_vec(vec![1.0, -2.0]);
        let cfg = BaselineConfig { step0: 0.25, max_iters: 20, ..BaselineConfig::new(Method::Pgd) };
        let t = run_baseline(&e.oracle, &x0, &cfg).unwrap();
        assert_eq!(t.terminated_by, Termination::MaxIters);
        for r in &t.records {
            assert!((&r.x - &x0 * 0.5f64.powi(r.k as i32)).norm() < 1e-15);
        }
    }

    #[test]
    fn start_at_minimizer() {
        let e = make_square(2).unwrap();
        let t = run_baseline(&e.oracle, &Vector::zeros(2), &BaselineConfig::new(Method::Psg)).unwrap();
        assert_eq!(t.records.len(), 1);
    }

    #[test]
    fn iterates_stay_in_region() {
        let e = make_square(2).unwrap();
        let region = RegionDescriptor::ball(Vector::from_vec(vec![1.0, 1.0]), 0.5);
        let cfg = BaselineConfig { region: Some(region.clone()), max_iters: 50, ..BaselineConfig::new(Method::Psg) };
        let t = run_baseline(&e.oracle, &Vector::from_vec(vec![5.0, 0.0]), &cfg).unwrap();
        assert!(t.records.iter().all(|r| region.contains(&r.x, 1e-12)));
    }

    #[test]
    fn minibatch_needs_finite_sum() {
        let e = make_square(2).unwrap();
        let r = run_baseline(&e.oracle, &Vector::from_vec(vec![1.0, 1.0]), &BaselineConfig::new(Method::Pssg));
        assert!(matches!(r, Err(Error::BadParameter(_))));
    }

    #[test]
    fn steps() {
        let c = BaselineConfig::new(Method::Psg);
        assert_eq!(c.step(0), 0.8);
        assert!((c.step(3) - 0.4).abs() < 1e-15);
        assert_eq!(BaselineConfig::new(Method::Pgd).step(10), 0.12);
    }
}
