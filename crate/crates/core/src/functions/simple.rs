//! Elementary objectives: `|y|`, `‖x‖²` and a one-dimensional slice of the spiky norm.

use std::sync::Arc;

use super::ZooEntry;
use crate::error::Result;
use crate::oracle::{FnObjective, Objective, ObjectiveOracle, Vector};
use crate::quasar::QuasarCertificate;

/// `|y|`, or `√(y² + μ²) − μ` when `mu > 0`.
#[derive(Clone, Copy, Debug)]
struct Abs {
    mu: f64,
}

impl Objective for Abs {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &Vector) -> f64 {
        if self.mu > 0.0 {
            (x[0] * x[0] + self.mu * self.mu).sqrt() - self.mu
        } else {
            x[0].abs()
        }
    }

    fn subgradient(&self, x: &Vector) -> Option<Vector> {
        let g = if self.mu > 0.0 {
            x[0] / (x[0] * x[0] + self.mu * self.mu).sqrt()
        } else if x[0] == 0.0 {
            0.0
        } else {
            x[0].signum()
        };
        Some(Vector::from_element(1, g))
    }

    fn smoothed(&self, mu: f64) -> Option<Arc<dyn Objective>> {
        Some(Arc::new(Abs { mu }))
    }
}

fn entry(id: &str, h: Arc<dyn Objective>, kappa: f64, gamma: f64, start: Vector) -> Result<ZooEntry> {
    let zero = Vector::zeros(h.dim());
    Ok(ZooEntry {
        id: id.into(),
        oracle: ObjectiveOracle::new(h).with_minimizer(zero.clone(), 0.0),
        certificate: Some(QuasarCertificate::global(kappa, gamma, zero)?),
        negative_certificates: vec![],
        provenance: format!("{id}; elementary test objective"),
        default_start: start,
    })
}

pub fn make_abs() -> Result<ZooEntry> {
    entry("abs", Arc::new(Abs { mu: 0.0 }), 1.0, 0.0, Vector::from_element(1, 3.0))
}

/// `‖x‖²` on `R^n`.
pub fn make_square(n: usize) -> Result<ZooEntry> {
    let h = FnObjective::new(n, |x: &Vector| x.norm_squared()).with_subgradient(|x| 2.0 * x);
    entry("square", Arc::new(h), 1.0, 2.0, Vector::from_element(n, 1.0))
}

/// `√|t| + 2t²`, the spiky norm along the first axis.
pub fn make_spiky_slice() -> Result<ZooEntry> {
    let h = FnObjective::new(1, |x: &Vector| x[0].abs().sqrt() + 2.0 * x[0] * x[0]).with_subgradient(
        |x: &Vector| {
            let t = x[0];
            let g = if t == 0.0 {
                0.0
            } else {
                t.signum() * 0.5 / t.abs().sqrt() + 4.0 * t
            };
            Vector::from_element(1, g)
        },
    );
    entry("spiky_slice", Arc::new(h), 0.5, 1.0, Vector::from_element(1, 0.5))
}
