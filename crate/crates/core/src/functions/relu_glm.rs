//! Noiseless ReLU regression `f(w) = E[½(ReLU(⟨w,x⟩) − ReLU(⟨w*,x⟩))²]` with `x`
//! uniform on the ball of radius `√c`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ZooEntry;
use crate::error::{Error, Result};
use crate::oracle::{Matrix, Objective, ObjectiveOracle, SeedStream, StochasticObjective, Vector};
use crate::quasar::QuasarCertificate;
use crate::region::{project_region, Ball, RegionDescriptor};

/// Stream offsets reserved for the evaluation batch, `w*` and the start point.
/// Iteration `k` of a run draws from offset `k + 1`.
const EVAL_OFFSET: u64 = 1 << 40;
const WSTAR_OFFSET: u64 = EVAL_OFFSET + 1;
const START_OFFSET: u64 = EVAL_OFFSET + 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlmConfig {
    pub n: usize,
    /// Squared radius of the sampling ball.
    pub c: f64,
    /// Drawn from `seed` with norm 2 when absent.
    pub w_star: Option<Vec<f64>>,
    pub batch_eval: usize,
    pub batch_full: usize,
    pub batch_sgd: usize,
    /// Radius of the density lower bound entering `ρ`.
    pub eps: f64,
    pub seed: u64,
}

impl Default for GlmConfig {
    fn default() -> Self {
        GlmConfig {
            n: 100,
            c: 4.0,
            w_star: None,
            batch_eval: 50_000,
            batch_full: 12_000,
            batch_sgd: 256,
            eps: 1.0,
            seed: 0,
        }
    }
}

impl GlmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParameter(m));
        if self.n == 0 {
            return bad("n = 0".into());
        }
        if !(self.c >= 0.5 && self.c.is_finite()) {
            return bad(format!("c = {} (need c ≥ 1/2)", self.c));
        }
        if let Some(w) = &self.w_star {
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if w.len() != self.n || (norm - 2.0).abs() > 1e-12 {
                return bad(format!("w_star must have length {} and norm 2", self.n));
            }
        }
        if self.batch_eval < 2 || self.batch_full == 0 || self.batch_sgd == 0 {
            return bad("batch sizes must be positive".into());
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps = {}", self.eps));
        }
        Ok(())
    }

    /// `ρ = ε⁴ sin³(π/8) / (8√2 c)`.
    pub fn rho(&self) -> f64 {
        self.eps.powi(4) * (PI / 8.0).sin().powi(3) / (8.0 * 2f64.sqrt() * self.c)
    }

    pub fn w_star(&self) -> Vector {
        match &self.w_star {
            Some(w) => Vector::from_column_slice(w),
            None => {
                let mut rng = SeedStream::new(self.seed).at(WSTAR_OFFSET).rng();
                let g = Vector::from_fn(self.n, |_, _| StandardNormal.sample(&mut rng));
                &g * (2.0 / g.norm())
            }
        }
    }
}

/// A point uniform on the ball of radius `radius` in `R^n`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vector {
    loop {
        let g = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = g.norm();
        if norm > 0.0 {
            let u: f64 = rng.random();
            return g * (radius * u.powf(1.0 / n as f64) / norm);
        }
    }
}

/// The population model; sample averages come from [`StochasticObjective::sample`].
#[derive(Clone, Debug)]
pub struct GlmModel {
    pub c: f64,
    pub w_star: Vector,
}

impl StochasticObjective for GlmModel {
    fn dim(&self) -> usize {
        self.w_star.len()
    }

    fn sample(&self, stream: SeedStream, batch: usize) -> Arc<dyn Objective> {
        let n = self.dim();
        let mut rng = stream.rng();
        let radius = self.c.sqrt();
        let mut xs = Matrix::zeros(batch, n);
        for j in 0..batch {
            xs.set_row(j, &sample_ball(&mut rng, n, radius).transpose());
        }
        let ys = (&xs * &self.w_star).map(|z| z.max(0.0));
        Arc::new(GlmBatch { xs, ys })
    }
}

/// The empirical risk over one batch.
struct GlmBatch {
    xs: Matrix,
    ys: Vector,
}

impl GlmBatch {
    fn residuals(&self, w: &Vector) -> (Vector, Vector) {
        let z = &self.xs * w;
        let r = Vector::from_fn(z.len(), |j, _| z[j].max(0.0) - self.ys[j]);
        (z, r)
    }
}

impl Objective for GlmBatch {
    fn dim(&self) -> usize {
        self.xs.ncols()
    }

    fn value(&self, w: &Vector) -> f64 {
        let (_, r) = self.residuals(w);
        0.5 * r.norm_squared() / r.len() as f64
    }

    /// `(1/M) Σ (ReLU(z_j) − y_j) 1{z_j > 0} x_j`.
    fn subgradient(&self, w: &Vector) -> Option<Vector> {
        let (z, mut r) = self.residuals(w);
        for j in 0..r.len() {
            if z[j] <= 0.0 {
                r[j] = 0.0;
            }
        }
        Some(self.xs.tr_mul(&r) / r.len() as f64)
    }

    fn std_err(&self, w: &Vector) -> Option<f64> {
        let (_, r) = self.residuals(w);
        let m = r.len() as f64;
        let losses = r.map(|v| 0.5 * v * v);
        let mean = losses.sum() / m;
        let var = losses.map(|l| (l - mean) * (l - mean)).sum() / (m - 1.0);
        Some((var / m).sqrt())
    }
}

/// `‖w − w*‖ ≤ ‖w*‖` and `‖w‖ ≤ 2‖w*‖`.
pub fn glm_region(w_star: &Vector) -> RegionDescriptor {
    RegionDescriptor::TwoBalls {
        first: Ball::new(w_star.clone(), w_star.norm()),
        second: Ball::new(Vector::zeros(w_star.len()), 2.0 * w_star.norm()),
    }
}

pub fn make_relu_glm(cfg: &GlmConfig) -> Result<ZooEntry> {
    cfg.validate()?;
    let w_star = cfg.w_star();
    let model = Arc::new(GlmModel { c: cfg.c, w_star: w_star.clone() });
    let stream = SeedStream::new(cfg.seed).at(EVAL_OFFSET);
    let oracle = ObjectiveOracle::stochastic(model, stream, cfg.batch_eval).with_minimizer(w_star.clone(), 0.0);
    let region = glm_region(&w_star);
    let mut rng = SeedStream::new(cfg.seed).at(START_OFFSET).rng();
    let dir = Vector::from_fn(cfg.n, |_, _| StandardNormal.sample(&mut rng));
    let start = project_region(&(&w_star + &dir * (0.3 * w_star.norm() / dir.norm())), &region)?;
    Ok(ZooEntry {
        id: "relu_glm".into(),
        oracle,
        certificate: Some(QuasarCertificate::new(cfg.rho(), cfg.c, w_star, region)?),
        negative_certificates: vec![],
        provenance: format!(
            "noiseless ReLU regression, n = {}, c = {}; certificate assumes a density bound with eps = {}",
            cfg.n, cfg.c, cfg.eps
        ),
        default_start: start,
    })
}
