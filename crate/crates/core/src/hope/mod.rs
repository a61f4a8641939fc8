//! The high-order proximal operator `argmin_y h(y) + ‖x − y‖^p / (pβ)`.

mod inner;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{ensure_finite, Objective, ObjectiveOracle, Vector};

pub use inner::{minimize, InnerResult};

/// Distance below which `y` is treated as the anchor itself.
pub const ANCHOR_EPS: f64 = 1e-14;
/// Smoothing continuation stops once the width reaches this value.
pub const SMOOTHING_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxConfig {
    pub p: f64,
    pub beta: f64,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Initial smoothing width; 0 solves the nonsmooth model directly.
    pub smoothing_mu: f64,
    pub smoothing_shrink: f64,
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig {
            p: 2.0,
            beta: 1.0,
            inner_tol: 1e-10,
            inner_max_iters: 2000,
            smoothing_mu: 0.0,
            smoothing_shrink: 0.1,
        }
    }
}

impl ProxConfig {
    pub fn new(p: f64, beta: f64) -> Self {
        ProxConfig {
            p,
            beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParameter(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p = {}", self.p));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta = {}", self.beta));
        }
        if !(self.inner_tol > 0.0) {
            return bad(format!("inner_tol = {}", self.inner_tol));
        }
        if self.inner_max_iters == 0 {
            return bad("inner_max_iters = 0".into());
        }
        if !(self.smoothing_mu >= 0.0) {
            return bad(format!("smoothing_mu = {}", self.smoothing_mu));
        }
        if self.smoothing_mu > 0.0 && !(self.smoothing_shrink > 0.0 && self.smoothing_shrink < 1.0) {
            return bad(format!("smoothing_shrink = {}", self.smoothing_shrink));
        }
        Ok(())
    }

    /// `‖x − y‖^p / (pβ)`.
    pub fn regularizer(&self, x: &Vector, y: &Vector) -> f64 {
        (x - y).norm().powf(self.p) / (self.p * self.beta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProxResult {
    pub y: Vector,
    /// `h(y) + ‖x − y‖^p / (pβ)` for the unsmoothed `h`.
    pub model_value: f64,
    pub inner_iters: usize,
    pub converged: bool,
}

/// Approximates a point of `prox_h^{β,p}(x)` by a local solve warm-started at `x`.
pub fn hope_solve(oracle: &ObjectiveOracle, x: &Vector, cfg: &ProxConfig) -> Result<ProxResult> {
    hope_solve_objective(oracle.objective().as_ref(), x, cfg)
}

/// [`hope_solve`] for a bare objective.
pub fn hope_solve_objective(h: &dyn Objective, x: &Vector, cfg: &ProxConfig) -> Result<ProxResult> {
    ensure_finite(x)?;
    cfg.validate()?;
    if x.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: x.len(),
        });
    }
    let hx = h.value(x);
    if !hx.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    if h.subgradient(x).is_none() {
        return Err(Error::MissingSubgradient);
    }
    let anchor_value = hx;
    let mut y = x.clone();
    let mut iters = 0;
    let mut converged = true;
    let smoothing = if cfg.smoothing_mu > 0.0 {
        h.smoothed(cfg.smoothing_mu).map(|_| cfg.smoothing_mu)
    } else {
        None
    };
    if let Some(mut mu) = smoothing {
        loop {
            let hs: Arc<dyn Objective> = h.smoothed(mu).ok_or(Error::UnsupportedAtom)?;
            let r = solve_model(hs.as_ref(), x, y, cfg);
            iters += r.iters;
            converged &= r.converged;
            y = r.y;
            if mu <= SMOOTHING_FLOOR * (1.0 + 1e-9) {
                break;
            }
            mu = (mu * cfg.smoothing_shrink).max(SMOOTHING_FLOOR);
        }
    } else {
        let r = solve_model(h, x, y, cfg);
        iters = r.iters;
        converged = r.converged;
        y = r.y;
    }
    let mut model_value = h.value(&y) + cfg.regularizer(x, &y);
    if !model_value.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    if model_value > anchor_value {
        y = x.clone();
        model_value = anchor_value;
    }
    Ok(ProxResult {
        y,
        model_value,
        inner_iters: iters,
        converged,
    })
}

fn solve_model(h: &dyn Objective, x: &Vector, y0: Vector, cfg: &ProxConfig) -> InnerResult {
    let model = |y: &Vector| {
        let d = y - x;
        let r = d.norm();
        let hy = h.value(y);
        let mut g = h.subgradient(y).unwrap_or_else(|| Vector::zeros(y.len()));
        if r >= ANCHOR_EPS {
            g += &d * (r.powf(cfg.p - 2.0) / cfg.beta);
        }
        (hy + r.powf(cfg.p) / (cfg.p * cfg.beta), g)
    };
    minimize(model, y0, cfg.inner_tol, cfg.inner_max_iters)
}
